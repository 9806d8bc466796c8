"""Two-sided runs: qubit-side reference against the compiled Fock-side schedule."""

import logging
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, List, Optional, Union

import numpy as np

from config.settings import (
    DEFAULT_COUPLING,
    DEFAULT_FIDELITY_TOL,
    DEFAULT_LEAKAGE_TOL,
    DEFAULT_REPORT_FORMAT,
    DEFAULT_RESIDUAL_TOL,
    DEFAULT_SEED,
    DENSE_LEVEL_LIMIT,
    OUTPUT_DIR,
    PROBE_STATES,
    REPORT_FORMATS,
    SUPPORTED_CIRCUIT_EXTENSIONS,
)
from control_compiler import (
    CompilationError,
    FixedInteraction,
    PulseSchedule,
    compile_circuit,
    diagonal_diagram_residual,
    execute_schedule,
    one_qubit_diagram_residual,
    process_fidelity,
)
from fock_core import FockVector
from gates import Circuit, circuit_unitary, one_qubit_matrix
from parsers.circuit_parser import CircuitParser
from report_generator import ReportGenerator
from schemas import validate_report_document, validate_schedule_document
from theta_encoding import QubitVector, ThetaEncoding, encode, leakage, make_encoding, restrict

logger = logging.getLogger(__name__)

VERIFY_DIAGRAMS = 'verify-diagrams'
SIMULATE = 'simulate'
COMPILE_ONLY = 'compile-only'
MODES = (VERIFY_DIAGRAMS, SIMULATE, COMPILE_ONLY)
DENSE_MODES = (VERIFY_DIAGRAMS, SIMULATE)


class CircuitTooLargeError(ValueError):
    """The circuit needs more levels than the requested mode can handle densely."""


@dataclass
class RunConfig:
    """Everything a single run needs; tolerances are echoed into the report."""

    circuit_path: Optional[Path] = None
    coupling: float = DEFAULT_COUPLING
    mode: str = SIMULATE
    output_path: Optional[Path] = None
    fidelity_tol: float = DEFAULT_FIDELITY_TOL
    leakage_tol: float = DEFAULT_LEAKAGE_TOL
    residual_tol: float = DEFAULT_RESIDUAL_TOL
    seed: int = DEFAULT_SEED
    report_format: str = DEFAULT_REPORT_FORMAT
    include_segments: bool = False

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"Unknown mode '{self.mode}'; expected one of {', '.join(MODES)}")
        if self.report_format not in REPORT_FORMATS:
            raise ValueError(f"Unsupported report format: {self.report_format}")
        if not math.isfinite(self.coupling):
            raise ValueError(f"Coupling must be finite, got {self.coupling}")
        for name in ('fidelity_tol', 'leakage_tol', 'residual_tol'):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.circuit_path is not None:
            self.circuit_path = Path(self.circuit_path)
        if self.output_path is not None:
            self.output_path = Path(self.output_path)

    def tolerances(self) -> Dict[str, float]:
        return {
            'fidelity': self.fidelity_tol,
            'leakage': self.leakage_tol,
            'residual': self.residual_tol,
        }


@dataclass
class Report:
    """Outcome of one run. Only generated_at varies between identical runs."""

    mode: str
    circuit: str
    n_qubits: int
    coupling: float
    tolerances: Dict[str, float]
    residuals: List[Dict] = field(default_factory=list)
    fidelity: Optional[float] = None
    state_fidelity: Optional[float] = None
    leakage: Optional[float] = None
    schedule: Optional[Dict] = None
    passed: bool = True
    generated_at: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat())

    def failures(self) -> List[str]:
        """Human-readable list of the tolerances this run violated."""
        reasons = []
        worst = max((r['residual'] for r in self.residuals), default=0.0)
        if worst > self.tolerances['residual']:
            reasons.append(f"diagram residual {worst:.3e} > {self.tolerances['residual']:g}")
        if self.fidelity is not None and self.fidelity < 1 - self.tolerances['fidelity']:
            reasons.append(f"process fidelity {self.fidelity:.12f} < 1 - {self.tolerances['fidelity']:g}")
        if self.state_fidelity is not None and self.state_fidelity < 1 - self.tolerances['fidelity']:
            reasons.append(f"state fidelity {self.state_fidelity:.12f} < 1 - {self.tolerances['fidelity']:g}")
        if self.leakage is not None and self.leakage > self.tolerances['leakage']:
            reasons.append(f"leakage {self.leakage:.3e} > {self.tolerances['leakage']:g}")
        return reasons

    def to_dict(self) -> Dict:
        return {
            'mode': self.mode,
            'circuit': self.circuit,
            'n_qubits': self.n_qubits,
            'coupling': self.coupling,
            'tolerances': dict(self.tolerances),
            'fidelity': self.fidelity,
            'state_fidelity': self.state_fidelity,
            'leakage': self.leakage,
            'residuals': list(self.residuals),
            'schedule': self.schedule,
            'pass': self.passed,
            'generated_at': self.generated_at,
        }


class SimulationRunner:
    """Drive one circuit through diagram checks, compilation and execution."""

    def __init__(self, config: RunConfig):
        """
        Initialize the runner.

        Args:
            config: Run configuration
        """
        self.config = config
        self.parser = CircuitParser()

    def load_circuit(self) -> Circuit:
        """
        Read and parse the configured circuit file.

        Raises:
            FileNotFoundError: If the file does not exist
            CircuitParseError: If the file is malformed
        """
        path = self.config.circuit_path
        if path is None:
            raise ValueError("No circuit path configured")
        if not path.exists():
            raise FileNotFoundError(f"File not found: {path}")
        if path.suffix.lower() not in SUPPORTED_CIRCUIT_EXTENSIONS:
            logger.warning("Unexpected circuit file extension '%s'; parsing anyway", path.suffix)
        return self.parser.parse_file(path)

    def run(self, circuit: Optional[Circuit] = None, name: Optional[str] = None) -> Report:
        """
        Execute the configured mode.

        Args:
            circuit: Circuit to run; parsed from config.circuit_path when omitted
            name: Label for the report (defaults to the circuit path)

        Returns:
            Report with pass/fail against the configured tolerances
        """
        if circuit is None:
            circuit = self.load_circuit()
        self.check_size(circuit)
        name = name or (str(self.config.circuit_path) if self.config.circuit_path else '<circuit>')
        enc = make_encoding(circuit.n)
        mode = self.config.mode

        report = Report(
            mode=mode,
            circuit=name,
            n_qubits=circuit.n,
            coupling=self.config.coupling,
            tolerances=self.config.tolerances(),
        )

        if mode in (VERIFY_DIAGRAMS, SIMULATE):
            report.residuals = self.diagram_residuals(circuit, enc)

        if mode in (COMPILE_ONLY, SIMULATE):
            schedule = self.compile(circuit, enc)
            report.schedule = self.schedule_summary(schedule)
            if mode == SIMULATE:
                self.simulate(circuit, schedule, report)

        report.passed = not report.failures()
        for reason in report.failures():
            logger.warning("%s: %s", name, reason)
        validate_report_document(report.to_dict())
        logger.info("%s finished %s (pass=%s)", mode, name, report.passed)
        return report

    def check_size(self, circuit: Circuit):
        """
        Reject circuits whose 2n levels exceed the dense limit in dense modes.

        Raises:
            CircuitTooLargeError: If the mode needs dense matrices on more than
                DENSE_LEVEL_LIMIT levels
        """
        levels = 2 * circuit.n
        if self.config.mode in DENSE_MODES and levels > DENSE_LEVEL_LIMIT:
            raise CircuitTooLargeError(
                f"{self.config.mode} supports at most {DENSE_LEVEL_LIMIT // 2} qubits "
                f"(J <= {DENSE_LEVEL_LIMIT}), got {circuit.n}; use compile-only"
            )

    def diagram_residuals(self, circuit: Circuit, enc: ThetaEncoding) -> List[Dict]:
        """Per-gate ||lift * theta - theta * gate|| for every gate of the circuit."""
        residuals = []
        for index, gate in enumerate(circuit.gates):
            if gate.is_diagonal:
                a, b = gate.targets
                value = diagonal_diagram_residual(gate.params, a, b, enc)
            else:
                value = one_qubit_diagram_residual(one_qubit_matrix(gate), gate.targets[0], enc)
            residuals.append({'index': index, 'gate': gate.describe(), 'residual': value})
        return residuals

    def compile(self, circuit: Circuit, enc: ThetaEncoding) -> PulseSchedule:
        g = self.config.coupling
        if circuit.has_entangling_gates() and g <= 0:
            raise CompilationError(
                f"entangling gates need a positive fixed coupling, got g={g}"
            )
        fixed = FixedInteraction.nearest_neighbor(enc, g)
        schedule = compile_circuit(circuit, fixed, enc)
        validate_schedule_document(schedule.to_dict())
        return schedule

    def schedule_summary(self, schedule: PulseSchedule) -> Dict:
        summary = schedule.statistics()
        if self.config.include_segments:
            document = schedule.to_dict()
            summary['header'] = document['header']
            summary['segments'] = document['segments']
        return summary

    def simulate(self, circuit: Circuit, schedule: PulseSchedule, report: Report):
        """Fill in fidelity, worst-case state fidelity and leakage."""
        enc = schedule.encoding
        U = circuit_unitary(circuit)
        evolution = execute_schedule(schedule)
        E = evolution.dense()
        report.fidelity = process_fidelity(U, restrict(evolution, enc))

        worst_fidelity, worst_leakage = 1.0, 0.0
        for v in self.probe_states(circuit.n):
            w = FockVector(E @ encode(v, enc).amplitudes, enc.J)
            expected = encode(QubitVector(U @ v.amplitudes), enc)
            worst_fidelity = min(worst_fidelity, abs(expected.inner(w)))
            worst_leakage = max(worst_leakage, leakage(w, enc))
        report.state_fidelity = float(min(1.0, worst_fidelity))
        report.leakage = float(min(1.0, worst_leakage))

    def probe_states(self, n: int) -> List[QubitVector]:
        """All computational basis states plus seeded random superpositions."""
        states = []
        for index in range(2 ** n):
            amplitudes = np.zeros(2 ** n, dtype=complex)
            amplitudes[index] = 1.0
            states.append(QubitVector(amplitudes))
        rng = np.random.default_rng(self.config.seed)
        for _ in range(PROBE_STATES):
            amplitudes = rng.normal(size=2 ** n) + 1j * rng.normal(size=2 ** n)
            states.append(QubitVector(amplitudes / np.linalg.norm(amplitudes)))
        return states

    def default_output_path(self) -> Path:
        stem = self.config.circuit_path.stem if self.config.circuit_path else 'circuit'
        return Path(OUTPUT_DIR) / f"{stem}_{self.config.mode}.{self.config.report_format}"

    def write_report(self, report: Report) -> str:
        output = self.config.output_path or self.default_output_path()
        generator = ReportGenerator(str(output.parent))
        return generator.generate_report(report.to_dict(), format=self.config.report_format,
                                         output_filename=output.name)


def run(config: RunConfig, circuit: Optional[Circuit] = None) -> Report:
    """Run a configuration end to end and write its report."""
    runner = SimulationRunner(config)
    report = runner.run(circuit)
    path = runner.write_report(report)
    logger.info("Report saved to %s", path)
    return report


def run_batch(paths: List[Union[str, Path]], base: RunConfig, output_dir: Union[str, Path]) -> List[Dict]:
    """
    Run every circuit file with the same settings.

    Returns:
        One summary row per file; failed runs carry an `error` entry
    """
    rows = []
    for path in paths:
        path = Path(path)
        out = Path(output_dir) / f"{path.stem}_{base.mode}.{base.report_format}"
        config = RunConfig(
            circuit_path=path,
            coupling=base.coupling,
            mode=base.mode,
            output_path=out,
            fidelity_tol=base.fidelity_tol,
            leakage_tol=base.leakage_tol,
            residual_tol=base.residual_tol,
            seed=base.seed,
            report_format=base.report_format,
            include_segments=base.include_segments,
        )
        try:
            report = run(config)
            rows.append(_summary_row(report, str(out)))
        except (OSError, ValueError) as e:
            logger.warning("Batch run failed for %s: %s", path, e)
            rows.append({'circuit': str(path), 'error': str(e), 'pass': False})
    return rows


def _summary_row(report: Report, report_path: str) -> Dict:
    schedule = report.schedule or {}
    return {
        'circuit': report.circuit,
        'mode': report.mode,
        'n_qubits': report.n_qubits,
        'max_residual': max((r['residual'] for r in report.residuals), default=None),
        'fidelity': report.fidelity,
        'state_fidelity': report.state_fidelity,
        'leakage': report.leakage,
        'segment_count': schedule.get('segment_count'),
        'total_duration': schedule.get('total_duration'),
        'pass': report.passed,
        'report': report_path,
        'error': '',
    }
