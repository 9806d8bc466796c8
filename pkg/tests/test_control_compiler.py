"""Tests for lifting, diagram closure and pulse compilation."""

import unittest

import numpy as np
import scipy.linalg
from numpy.testing import assert_allclose

from control_compiler import (
    CompilationError,
    FixedInteraction,
    NonUnitaryError,
    OneQubitHamiltonian,
    PulseSchedule,
    PulseSegment,
    compile_circuit,
    diagonal_diagram_residual,
    echo_flip_set,
    execute_schedule,
    hamiltonian_log,
    lift_diagonal,
    lift_one_qubit,
    one_qubit_diagram_residual,
    process_fidelity,
    restriction_residual,
    route_circuit,
    unitary_log,
    verify_diagram,
)
from evolution import unitary
from fock_core import FockVector
from gates import Circuit, GateOp, circuit_unitary, embed_one_qubit, is_entangling
from hamiltonians import HamiltonianSpec, assemble
from random_circuits import random_circuit
from schemas import SchemaError, validate_schedule_document
from theta_encoding import QubitVector, encode, leakage, make_encoding, restrict

X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.diag([1, -1]).astype(complex)
H_GATE = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
CZ = (0.0, 0.0, 0.0, np.pi)


def _random_hermitian(rng):
    d = complex(rng.normal(), rng.normal())
    return OneQubitHamiltonian(d1=rng.normal(), d2=rng.normal(), d=d)


def _compiled_fidelity(circuit, fixed, enc):
    schedule = compile_circuit(circuit, fixed, enc)
    E = execute_schedule(schedule)
    return schedule, E, process_fidelity(circuit_unitary(circuit), restrict(E, enc))


class TestHamiltonianLog(unittest.TestCase):
    """Test the principal logarithm."""

    def test_identity(self):
        """Test that the identity has a zero Hamiltonian."""
        self.assertTrue(hamiltonian_log(np.eye(2)).is_zero())

    def test_phase_flip(self):
        """Test the log of Z."""
        h = hamiltonian_log(Z)
        assert_allclose(h.matrix(), np.diag([0, np.pi]), atol=1e-12)
        assert_allclose(scipy.linalg.expm(-1j * h.matrix()), Z, atol=1e-12)

    def test_bit_flip(self):
        """Test the log of X."""
        h = hamiltonian_log(X)
        self.assertAlmostEqual(h.d1, np.pi / 2)
        self.assertAlmostEqual(h.d2, np.pi / 2)
        self.assertAlmostEqual(h.d, -np.pi / 2)

    def test_random_unitaries(self):
        """Test that exp(-i log U) recovers random unitaries."""
        rng = np.random.default_rng(41)
        for _ in range(20):
            U = scipy.linalg.expm(-1j * _random_hermitian(rng).matrix())
            H = hamiltonian_log(U).matrix()
            assert_allclose(scipy.linalg.expm(-1j * H), U, atol=1e-10)
            self.assertTrue(np.all(np.abs(np.linalg.eigvalsh(H)) <= np.pi + 1e-12))

    def test_larger_unitary(self):
        """Test the log of a two-qubit unitary."""
        U = np.kron(H_GATE, Z)
        assert_allclose(scipy.linalg.expm(-1j * unitary_log(U)), U, atol=1e-10)

    def test_non_unitary(self):
        """Test that non-unitary input is rejected."""
        with self.assertRaises(NonUnitaryError):
            hamiltonian_log(np.array([[1, 1], [0, 1]]))


class TestLiftOneQubit(unittest.TestCase):
    """Test field + tunneling lifts of one-qubit Hamiltonians."""

    def test_zero_hamiltonian(self):
        """Test lifting a zero Hamiltonian."""
        enc = make_encoding(2)
        spec = lift_one_qubit(OneQubitHamiltonian(0.0, 0.0), 1, enc)
        self.assertFalse(spec.has_coefficients())
        self.assertAlmostEqual(one_qubit_diagram_residual(np.eye(2), 1, enc), 0.0)

    def test_phase_on_upper_level(self):
        """Test that a Z phase lands on the upper level."""
        enc = make_encoding(1)
        spec = lift_one_qubit(hamiltonian_log(Z), 0, enc)
        self.assertAlmostEqual(spec.alpha[enc.upper(0)], np.pi, delta=1e-12)
        self.assertAlmostEqual(spec.alpha.get(enc.lower(0), 0.0), 0.0, delta=1e-12)
        self.assertLessEqual(one_qubit_diagram_residual(Z, 0, enc), 1e-12)

    def test_tunneling_absorbs_sign(self):
        """Test that the lifted tunneling carries the pair sign."""
        enc = make_encoding(2)
        spec = lift_one_qubit(OneQubitHamiltonian(0.0, 0.0, np.pi / 2), 1, enc)
        self.assertEqual(spec.gamma, {enc.level_positions(1): -np.pi / 2})

    def test_hamiltonian_diagram(self):
        """Test that lifted Hamiltonians restrict to the qubit Hamiltonian."""
        rng = np.random.default_rng(43)
        for n in range(1, 4):
            enc = make_encoding(n)
            for pair in range(n):
                h = _random_hermitian(rng)
                lifted = assemble(lift_one_qubit(h, pair, enc))
                full = embed_one_qubit(h.matrix(), pair, n)
                self.assertLessEqual(verify_diagram(full, lifted, enc), 1e-10)

    def test_gate_diagram_closure(self):
        """Test the gate diagram for random one-qubit unitaries on every pair up to n=4."""
        rng = np.random.default_rng(47)
        for n in range(1, 5):
            enc = make_encoding(n)
            for _ in range(50):
                h = _random_hermitian(rng)
                for pair in range(n):
                    U = scipy.linalg.expm(-1j * h.matrix())
                    self.assertLessEqual(one_qubit_diagram_residual(U, pair, enc), 1e-9)

    def test_mismatched_wiring_is_detected(self):
        """Test that a wrong lift gives a large residual."""
        enc = make_encoding(1)
        lifted_z = unitary(assemble(lift_one_qubit(hamiltonian_log(Z), 0, enc)), 1.0)
        self.assertGreaterEqual(verify_diagram(X, lifted_z, enc), 1.0)

    def test_identity_diagram(self):
        """Test the identity diagram."""
        enc = make_encoding(2)
        fock_identity = unitary(assemble(HamiltonianSpec(J=4)), 1.0)
        self.assertEqual(verify_diagram(np.eye(4), fock_identity, enc), 0.0)


class TestLiftDiagonal(unittest.TestCase):
    """Test lifts of two-qubit diagonal gates."""

    def setUp(self):
        self.enc = make_encoding(2)

    def test_controlled_phase(self):
        """Test that CZ lifts to a single upper-level coupling."""
        spec = lift_diagonal(CZ, 0, 1, self.enc)
        key = (self.enc.upper(0), self.enc.upper(1))
        self.assertEqual(list(spec.beta), [key])
        self.assertAlmostEqual(spec.beta[key], np.pi, delta=1e-12)
        self.assertEqual(spec.alpha, {})
        self.assertLessEqual(restriction_residual(spec, CZ, 0, 1, self.enc), 1e-12)

    def test_zero_phases(self):
        """Test that zero phases give an empty lift."""
        self.assertTrue(lift_diagonal((0, 0, 0, 0), 0, 1, self.enc).is_empty())

    def test_global_phase(self):
        """Test that a uniform phase goes into the offset."""
        spec = lift_diagonal((0.7, 0.7, 0.7, 0.7), 0, 1, self.enc)
        self.assertFalse(spec.has_coefficients())
        self.assertAlmostEqual(spec.offset, 0.7)
        self.assertLessEqual(restriction_residual(spec, (0.7,) * 4, 0, 1, self.enc), 1e-12)

    def test_random_diagonals(self):
        """Test diagram residuals for random diagonal gates."""
        rng = np.random.default_rng(53)
        enc = make_encoding(3)
        for _ in range(50):
            phases = tuple(rng.uniform(-np.pi, np.pi, size=4))
            a, b = (int(q) for q in rng.choice(3, size=2, replace=False))
            spec = lift_diagonal(phases, a, b, enc)
            self.assertLessEqual(restriction_residual(spec, phases, a, b, enc), 1e-10)
            self.assertLessEqual(diagonal_diagram_residual(phases, a, b, enc), 1e-10)

    def test_entangling_lift_stays_entangling(self):
        """Test that a lift keeps whether the diagonal gate entangles."""
        rng = np.random.default_rng(59)
        for _ in range(20):
            phases = tuple(rng.uniform(-np.pi, np.pi, size=4))
            restricted = restrict(unitary(assemble(lift_diagonal(phases, 0, 1, self.enc)), 1.0), self.enc)
            lifted_phases = -np.angle(np.diag(restricted))
            self.assertEqual(is_entangling(phases), is_entangling(lifted_phases))

    def test_same_pair_rejected(self):
        """Test a diagonal gate on one pair twice."""
        with self.assertRaises(ValueError):
            lift_diagonal(CZ, 1, 1, self.enc)


class TestFixedInteraction(unittest.TestCase):
    """Test the permanent coupling and its qubit graph."""

    def test_nearest_neighbor(self):
        """Test the nearest-neighbor fixed interaction."""
        enc = make_encoding(3)
        fixed = FixedInteraction.nearest_neighbor(enc, 0.5)
        self.assertEqual(fixed.table, {(3, 4): 0.5, (4, 5): 0.5})
        self.assertEqual(fixed.qubit_couplings(enc), {(0, 1): 0.5, (1, 2): 0.5})

    def test_level_side_signs(self):
        """Test coupling signs by level side."""
        enc = make_encoding(2)
        fixed = FixedInteraction(beta={(enc.lower(0), enc.upper(1)): 0.3,
                                       (enc.lower(0), enc.upper(0)): 1.0})
        self.assertEqual(fixed.qubit_couplings(enc), {(0, 1): -0.3})

    def test_levels_outside_encoding(self):
        """Test couplings on levels the encoding does not use."""
        enc = make_encoding(1)
        with self.assertRaises(CompilationError):
            FixedInteraction(beta={(0, 3): 1.0}).qubit_couplings(enc)


class TestEchoAndRouting(unittest.TestCase):
    """Test echo flip selection and SWAP routing."""

    def test_chain_echo(self):
        """Test the echo flips on a chain."""
        couplings = {(0, 1): 1.0, (1, 2): 1.0}
        self.assertEqual(echo_flip_set((0, 1), couplings, 3), frozenset({2}))
        self.assertEqual(echo_flip_set((1, 2), couplings, 3), frozenset({0}))
        self.assertEqual(echo_flip_set((0, 1), {(0, 1): 1.0}, 2), frozenset())

    def test_frustrated_cycle(self):
        """Test that couplings the echo cannot refocus are rejected."""
        couplings = {(0, 1): 1.0, (1, 2): 1.0, (2, 3): 1.0, (0, 3): 1.0}
        with self.assertRaises(CompilationError):
            echo_flip_set((0, 1), couplings, 4)

    def test_routing_preserves_unitary(self):
        """Test that SWAP routing keeps the circuit unitary."""
        circuit = Circuit(n=3, gates=(GateOp('h', (0,)), GateOp('diag', (0, 2), (0.1, 0.4, -0.3, 2.0))))
        routed = route_circuit(circuit, {(0, 1): 1.0, (1, 2): 1.0})
        self.assertGreater(len(routed), len(circuit))
        for gate in routed.gates:
            if gate.is_diagonal:
                self.assertIn(tuple(sorted(gate.targets)), ((0, 1), (1, 2)))
        assert_allclose(circuit_unitary(routed), circuit_unitary(circuit), atol=1e-12)

    def test_disconnected_qubits(self):
        """Test routing without any coupling path."""
        circuit = Circuit(n=2, gates=(GateOp('diag', (0, 1), CZ),))
        with self.assertRaises(CompilationError):
            route_circuit(circuit, {})


class TestCompileCircuit(unittest.TestCase):
    """Test end-to-end compilation under an always-on coupling."""

    def test_empty_circuit(self):
        """Test compiling an empty circuit."""
        enc = make_encoding(2)
        fixed = FixedInteraction(beta=())
        schedule, E, fidelity = _compiled_fidelity(Circuit(n=2), fixed, enc)
        self.assertEqual(schedule.segment_count, 0)
        self.assertAlmostEqual(fidelity, 1.0, delta=1e-15)

    def test_controlled_phase(self):
        """Test the CZ schedule duration and fidelity."""
        enc = make_encoding(2)
        g = 1.0
        fixed = FixedInteraction.nearest_neighbor(enc, g)
        circuit = Circuit(n=2, gates=(GateOp('diag', (0, 1), CZ),))
        schedule, E, fidelity = _compiled_fidelity(circuit, fixed, enc)
        self.assertAlmostEqual(schedule.total_duration, np.pi / g)
        self.assertEqual(schedule.segment_count, 1)
        self.assertGreaterEqual(fidelity, 1 - 1e-9)

    def test_weaker_coupling_takes_longer(self):
        """Test that the free-evolution time scales as 1/g."""
        enc = make_encoding(2)
        fixed = FixedInteraction.nearest_neighbor(enc, 0.25)
        circuit = Circuit(n=2, gates=(GateOp('diag', (0, 1), (0.2, -0.1, 0.4, 1.3)),))
        schedule, E, fidelity = _compiled_fidelity(circuit, fixed, enc)
        self.assertGreaterEqual(fidelity, 1 - 1e-9)
        self.assertLess(schedule.total_duration, 2 * np.pi / 0.25)

    def test_three_qubits_with_echo(self):
        """Test a three-qubit circuit with an echoed idle coupling."""
        enc = make_encoding(3)
        fixed = FixedInteraction.nearest_neighbor(enc, 1.0)
        circuit = Circuit(n=3, gates=(
            GateOp('h', (0,)),
            GateOp('diag', (0, 1), CZ),
            GateOp('x', (2,)),
        ))
        schedule, E, fidelity = _compiled_fidelity(circuit, fixed, enc)
        self.assertGreaterEqual(fidelity, 1 - 1e-6)
        echo_labels = [s.label for s in schedule.segments if s.label.startswith('echo flip')]
        self.assertEqual(echo_labels, ['echo flip q2', 'echo flip q2'])

    def test_mixed_level_coupling(self):
        """Test a coupling between a lower and an upper level."""
        enc = make_encoding(2)
        fixed = FixedInteraction(beta={(enc.lower(0), enc.upper(1)): 0.5})
        circuit = Circuit(n=2, gates=(GateOp('diag', (1, 0), (0.3, 0.0, -0.8, 2.2)),))
        _, _, fidelity = _compiled_fidelity(circuit, fixed, enc)
        self.assertGreaterEqual(fidelity, 1 - 1e-9)

    def test_random_circuits(self):
        """Test seeded random circuits end to end."""
        for seed in range(20):
            n = 2 + seed % 2
            circuit = random_circuit(n, 1 + seed % 6, seed=1000 + seed)
            enc = make_encoding(n)
            fixed = FixedInteraction.nearest_neighbor(enc, 1.0)
            schedule, E, fidelity = _compiled_fidelity(circuit, fixed, enc)
            self.assertGreaterEqual(fidelity, 1 - 1e-6, msg=f"seed {1000 + seed}")

            U = circuit_unitary(circuit)
            for index in range(2 ** n):
                v = QubitVector(np.eye(2 ** n)[index])
                w = FockVector(E.dense() @ encode(v, enc).amplitudes, enc.J)
                self.assertLessEqual(leakage(w, enc), 1e-8)
                expected = encode(QubitVector(U @ v.amplitudes), enc)
                self.assertGreaterEqual(abs(expected.inner(w)), 1 - 1e-6)

    def test_schedules_never_actuate_beta(self):
        """Test that segments only carry field and tunneling controls."""
        for seed in range(5):
            circuit = random_circuit(3, 6, seed=seed)
            enc = make_encoding(3)
            schedule = compile_circuit(circuit, FixedInteraction.nearest_neighbor(enc, 1.0), enc)
            document = schedule.to_dict()
            validate_schedule_document(document)
            for segment in document['segments']:
                self.assertNotIn('beta', segment)

    def test_beta_control_is_rejected(self):
        """Test that a beta control is refused."""
        enc = make_encoding(2)
        schedule = compile_circuit(Circuit(n=2, gates=(GateOp('x', (0,)),)),
                                   FixedInteraction.nearest_neighbor(enc, 1.0), enc)
        document = schedule.to_dict()
        document['segments'][0]['beta'] = [{'i': 2, 'j': 3, 'value': 1.0}]
        with self.assertRaises(SchemaError):
            validate_schedule_document(document)
        with self.assertRaises(CompilationError):
            PulseSegment.from_spec(0.0, HamiltonianSpec(J=4, beta={(2, 3): 1.0}))

    def test_schedule_dict_round_trip(self):
        """Test rebuilding a schedule from its JSON form."""
        enc = make_encoding(3)
        schedule = compile_circuit(random_circuit(3, 5, seed=77),
                                   FixedInteraction.nearest_neighbor(enc, 1.0), enc)
        self.assertEqual(PulseSchedule.from_dict(schedule.to_dict()), schedule)

    def test_entangling_gate_without_coupling(self):
        """Test compiling a CZ with zero coupling."""
        enc = make_encoding(2)
        circuit = Circuit(n=2, gates=(GateOp('diag', (0, 1), CZ),))
        with self.assertRaises(CompilationError):
            compile_circuit(circuit, FixedInteraction.nearest_neighbor(enc, 0.0), enc)

    def test_pulse_segment_validation(self):
        """Test segment field validation."""
        with self.assertRaises(ValueError):
            PulseSegment(duration=-1.0)


if __name__ == '__main__':
    unittest.main()
