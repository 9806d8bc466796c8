"""Tests for two-sided simulation runs."""

import json
import os
import shutil
import tempfile
import unittest
from pathlib import Path
from unittest import mock

import numpy as np

from config.settings import DEFAULT_SEED, DENSE_LEVEL_LIMIT, PROBE_STATES
from control_compiler import CompilationError
from gates import Circuit, GateOp
from parsers.circuit_parser import CircuitParseError
from random_circuits import random_circuit
from schemas import validate_report_document
from simulation_runner import (
    COMPILE_ONLY,
    SIMULATE,
    VERIFY_DIAGRAMS,
    CircuitTooLargeError,
    Report,
    RunConfig,
    SimulationRunner,
    run,
    run_batch,
)

FIXTURES = Path(__file__).parent / 'fixtures'
CZ = Circuit(n=2, gates=(GateOp('diag', (0, 1), (0.0, 0.0, 0.0, np.pi)),))


def _without_timestamp(report):
    data = report.to_dict()
    data.pop('generated_at')
    return data


class TestRunConfig(unittest.TestCase):
    """Test run configuration validation."""

    def test_defaults(self):
        """Test the default run configuration."""
        config = RunConfig()
        self.assertEqual(config.mode, SIMULATE)
        self.assertEqual(set(config.tolerances()), {'fidelity', 'leakage', 'residual'})

    def test_invalid_values(self):
        """Test invalid run configurations."""
        with self.assertRaises(ValueError):
            RunConfig(mode='optimize')
        with self.assertRaises(ValueError):
            RunConfig(report_format='pdf')
        with self.assertRaises(ValueError):
            RunConfig(coupling=float('inf'))
        with self.assertRaises(ValueError):
            RunConfig(fidelity_tol=0.0)

    def test_paths_are_normalized(self):
        """Test that paths become Path objects."""
        config = RunConfig(circuit_path='a.circ', output_path='out/r.json')
        self.assertIsInstance(config.circuit_path, Path)
        self.assertIsInstance(config.output_path, Path)


class TestSimulationRunner(unittest.TestCase):
    """Test each run mode."""

    def test_empty_circuit(self):
        """Test simulating an empty circuit."""
        report = SimulationRunner(RunConfig()).run(Circuit(n=2))
        self.assertAlmostEqual(report.fidelity, 1.0, delta=1e-12)
        self.assertAlmostEqual(report.leakage, 0.0, delta=1e-12)
        self.assertEqual(report.schedule['segment_count'], 0)
        self.assertTrue(report.passed)

    def test_controlled_phase(self):
        """Test simulating CZ."""
        report = SimulationRunner(RunConfig(coupling=1.0)).run(CZ, name='cz')
        self.assertGreaterEqual(report.fidelity, 1 - 1e-9)
        self.assertAlmostEqual(report.schedule['total_duration'], np.pi, delta=1e-12)
        self.assertEqual(report.circuit, 'cz')
        self.assertTrue(report.passed)

    def test_seeded_random_circuit(self):
        """Test a seeded random three-qubit circuit."""
        circuit = random_circuit(3, 6, seed=DEFAULT_SEED)
        report = SimulationRunner(RunConfig()).run(circuit)
        self.assertGreaterEqual(report.fidelity, 1 - 1e-6)
        self.assertGreaterEqual(report.state_fidelity, 1 - 1e-6)
        self.assertLessEqual(report.leakage, 1e-8)
        self.assertTrue(report.passed)

    def test_verify_diagrams_mode(self):
        """Test verify-diagrams mode."""
        circuit = random_circuit(3, 8, seed=5, gate_set=('h', 'phase', 'rot', 'diag'))
        report = SimulationRunner(RunConfig(mode=VERIFY_DIAGRAMS)).run(circuit)
        self.assertEqual(len(report.residuals), 8)
        self.assertTrue(all(r['residual'] <= 1e-9 for r in report.residuals))
        self.assertIsNone(report.fidelity)
        self.assertIsNone(report.schedule)

    def test_compile_only_mode(self):
        """Test compile-only mode with segments."""
        config = RunConfig(mode=COMPILE_ONLY, include_segments=True)
        report = SimulationRunner(config).run(CZ)
        self.assertEqual(report.residuals, [])
        self.assertIsNone(report.fidelity)
        self.assertEqual(report.schedule['header']['J'], 4)
        self.assertEqual(len(report.schedule['segments']), report.schedule['segment_count'])

    def test_entangling_gate_needs_coupling(self):
        """Test that CZ needs a positive coupling."""
        with self.assertRaises(CompilationError):
            SimulationRunner(RunConfig(coupling=0.0)).run(CZ)

    def test_dense_modes_reject_large_circuits(self):
        """Test that dense modes refuse n beyond the dense level limit before any work."""
        circuit = Circuit(n=DENSE_LEVEL_LIMIT // 2 + 1, gates=(GateOp('x', (0,)),))
        for mode in (VERIFY_DIAGRAMS, SIMULATE):
            runner = SimulationRunner(RunConfig(mode=mode))
            with mock.patch.object(runner, 'diagram_residuals') as residuals:
                with self.assertRaises(CircuitTooLargeError):
                    runner.run(circuit)
                residuals.assert_not_called()

    def test_compile_only_allows_large_circuits(self):
        """Test that compile-only still handles n beyond the dense level limit."""
        circuit = Circuit(n=DENSE_LEVEL_LIMIT // 2 + 1, gates=(GateOp('x', (0,)),))
        report = SimulationRunner(RunConfig(mode=COMPILE_ONLY)).run(circuit)
        self.assertEqual(report.schedule['segment_count'], 1)

    def test_local_circuit_without_coupling(self):
        """Test a local-only circuit with zero coupling."""
        circuit = Circuit(n=2, gates=(GateOp('h', (0,)), GateOp('x', (1,))))
        report = SimulationRunner(RunConfig(coupling=0.0)).run(circuit)
        self.assertTrue(report.passed)

    def test_deterministic(self):
        """Test that reports repeat apart from the timestamp."""
        circuit = random_circuit(2, 5, seed=3)
        first = SimulationRunner(RunConfig()).run(circuit)
        second = SimulationRunner(RunConfig()).run(circuit)
        self.assertEqual(_without_timestamp(first), _without_timestamp(second))

    def test_report_validates_in_every_mode(self):
        """Test report validation in every mode."""
        for mode in (VERIFY_DIAGRAMS, SIMULATE, COMPILE_ONLY):
            report = SimulationRunner(RunConfig(mode=mode)).run(CZ)
            validate_report_document(report.to_dict())

    def test_probe_states_are_seeded(self):
        """Test that probe states repeat for a seed."""
        runner = SimulationRunner(RunConfig(seed=11))
        first, second = runner.probe_states(2), runner.probe_states(2)
        self.assertEqual(len(first), 4 + PROBE_STATES)
        for a, b in zip(first, second):
            np.testing.assert_array_equal(a.amplitudes, b.amplitudes)


class TestReport(unittest.TestCase):
    """Test tolerance bookkeeping."""

    def setUp(self):
        self.tolerances = {'fidelity': 1e-6, 'leakage': 1e-8, 'residual': 1e-9}

    def test_failures(self):
        """Test the failure reasons."""
        report = Report(mode=SIMULATE, circuit='c', n_qubits=1, coupling=1.0, tolerances=self.tolerances,
                        residuals=[{'index': 0, 'gate': 'x 0', 'residual': 1e-3}],
                        fidelity=0.5, state_fidelity=0.5, leakage=0.1)
        reasons = report.failures()
        self.assertEqual(len(reasons), 4)
        self.assertTrue(reasons[0].startswith('diagram residual'))

    def test_pass_key(self):
        """Test the pass key of a clean report."""
        report = Report(mode=VERIFY_DIAGRAMS, circuit='c', n_qubits=1, coupling=1.0,
                        tolerances=self.tolerances)
        self.assertEqual(report.failures(), [])
        self.assertIs(report.to_dict()['pass'], True)


class TestRunFiles(unittest.TestCase):
    """Test runs that read circuit files and write reports."""

    def setUp(self):
        self.temp_dir = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.temp_dir, ignore_errors=True)

    def test_run_writes_json_report(self):
        """Test that run writes a valid JSON report."""
        out = Path(self.temp_dir) / 'cz.json'
        report = run(RunConfig(circuit_path=FIXTURES / 'cz.circ', output_path=out))
        self.assertTrue(report.passed)
        with open(out, 'r', encoding='utf-8') as f:
            data = json.load(f)
        self.assertTrue(data['pass'])
        self.assertEqual(data['circuit'], str(FIXTURES / 'cz.circ'))
        validate_report_document(data)

    def test_three_qubit_fixture(self):
        """Test the three-qubit fixture."""
        report = SimulationRunner(RunConfig(circuit_path=FIXTURES / 'three_qubit.circ')).run()
        self.assertEqual(report.n_qubits, 3)
        self.assertGreaterEqual(report.fidelity, 1 - 1e-6)

    def test_parse_error_propagates(self):
        """Test that parse errors reach the caller."""
        with self.assertRaises(CircuitParseError):
            SimulationRunner(RunConfig(circuit_path=FIXTURES / 'bad_gate.circ')).run()

    def test_missing_file(self):
        """Test a missing circuit file."""
        with self.assertRaises(FileNotFoundError):
            SimulationRunner(RunConfig(circuit_path=Path(self.temp_dir) / 'absent.circ')).run()

    def test_batch(self):
        """Test a batch with one bad file."""
        paths = [FIXTURES / 'cz.circ', FIXTURES / 'empty.circ', FIXTURES / 'bad_gate.circ']
        rows = run_batch(paths, RunConfig(), self.temp_dir)
        self.assertEqual([row['pass'] for row in rows], [True, True, False])
        self.assertIn("unknown gate 'q' at line 2", rows[2]['error'])
        self.assertTrue(os.path.exists(rows[0]['report']))
        self.assertEqual(rows[1]['segment_count'], 0)


if __name__ == '__main__':
    unittest.main()
