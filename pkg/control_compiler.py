"""
Field + tunneling control of dual-rail fermionic qubits.

One-qubit gates are lifted to external-field and within-pair tunneling
pulses. Entangling diagonal gates use the fixed, always-on diagonal
interaction: the schedule lets it run for t = kappa / g, and couplings that
must stay idle are refocused by flipping one qubit of each at the midpoint
and again at the end. Whatever one-qubit phase the refocusing leaves behind
is removed by a final external-field pulse.

The schedule never actuates the diagonal interaction itself; a segment only
carries alpha (field) and gamma (tunneling) settings.
"""

import logging
from collections import deque
from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.linalg

from config.settings import UNITARY_TOL
from evolution import unitary
from fock_core import DimensionMismatchError, Operator, basis_occupations
from gates import (
    DIAG,
    Circuit,
    GateOp,
    diagonal_gate,
    embed_one_qubit,
    entangling_phase,
    is_entangling,
    one_qubit_matrix,
)
from hamiltonians import HamiltonianSpec, assemble
from theta_encoding import (
    ThetaEncoding,
    isometry_matrix,
    qubit_bits,
    restrict,
    subspace_F,
    tunneling_sign,
)

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * np.pi
CZ_PHASES = (0.0, 0.0, 0.0, np.pi)
_ZERO_TOL = 1e-14


class CompilationError(ValueError):
    """The circuit cannot be realized with the given fixed interaction."""


class NonUnitaryError(ValueError):
    """A matrix expected to be unitary is not."""


def wrap_phase(phi: float) -> float:
    """Map a phase into (-pi, pi]."""
    wrapped = float(np.mod(phi + np.pi, TWO_PI) - np.pi)
    return np.pi if np.isclose(wrapped, -np.pi, rtol=0, atol=1e-12) else wrapped


@dataclass(frozen=True)
class OneQubitHamiltonian:
    """[[d1, d], [conj(d), d2]]: the H0 + H1 split of a qubit Hamiltonian."""

    d1: float
    d2: float
    d: complex = 0j

    def matrix(self) -> np.ndarray:
        return np.array([[self.d1, self.d], [np.conj(self.d), self.d2]], dtype=complex)

    @classmethod
    def from_matrix(cls, h: np.ndarray) -> 'OneQubitHamiltonian':
        h = np.asarray(h, dtype=complex)
        if h.shape != (2, 2) or np.linalg.norm(h - h.conj().T) > 1e-10:
            raise ValueError("Expected a Hermitian 2x2 matrix")
        return cls(d1=float(h[0, 0].real), d2=float(h[1, 1].real), d=complex(h[0, 1]))

    def is_zero(self) -> bool:
        return self.d1 == 0 and self.d2 == 0 and self.d == 0


def unitary_log(U: np.ndarray) -> np.ndarray:
    """
    Principal Hermitian logarithm: H with exp(-iH) = U.

    Eigenphases lie in (-pi, pi]; an eigenvalue at -1 gets phase +pi.

    Raises:
        NonUnitaryError: If ||U^+ U - I|| exceeds the unitary tolerance
    """
    U = np.asarray(U, dtype=complex)
    if U.ndim != 2 or U.shape[0] != U.shape[1]:
        raise DimensionMismatchError(f"Expected a square matrix, got shape {U.shape}")
    residual = np.linalg.norm(U.conj().T @ U - np.eye(U.shape[0]))
    if residual > UNITARY_TOL:
        raise NonUnitaryError(f"Matrix is not unitary (residual {residual:.3e})")
    # Complex Schur form of a normal matrix is diagonal
    T, Z = scipy.linalg.schur(U, output='complex')
    phases = np.array([wrap_phase(-np.angle(value)) for value in np.diag(T)])
    H = (Z * phases) @ Z.conj().T
    return 0.5 * (H + H.conj().T)


def hamiltonian_log(U: np.ndarray) -> OneQubitHamiltonian:
    """One-qubit Hamiltonian H with exp(-iH) = U on the principal branch."""
    U = np.asarray(U, dtype=complex)
    if U.shape != (2, 2):
        raise DimensionMismatchError(f"Expected a 2x2 unitary, got shape {U.shape}")
    return OneQubitHamiltonian.from_matrix(unitary_log(U))


def lift_one_qubit(h: OneQubitHamiltonian, pair: int, enc: ThetaEncoding) -> HamiltonianSpec:
    """
    Field + tunneling Hamiltonian acting as h on qubit `pair`.

    d1 and d2 become fields on the lower and upper level; the off-diagonal d
    becomes tunneling between them, with the constant sign of within-pair
    hops on F absorbed into the coefficient.
    """
    lower, upper = enc.level_positions(pair)
    alpha = {level: value for level, value in ((lower, h.d1), (upper, h.d2)) if value != 0}
    gamma = {}
    if h.d != 0:
        gamma[(lower, upper)] = tunneling_sign(pair, enc) * complex(h.d)
    return HamiltonianSpec(J=enc.J, alpha=alpha, gamma=gamma)


def lift_diagonal(phases: Sequence[float], pair_a: int, pair_b: int,
                  enc: ThetaEncoding) -> HamiltonianSpec:
    """
    Fock Hamiltonian whose unit-time evolution applies diag(exp(-i phi)) on F.

    Writes phi_ab = c + x*a + y*b + kappa*a*b and solves for the global
    offset c, fields x, y on the two upper levels and beta = kappa between
    the upper levels (minimum-norm least squares; the system is square).
    """
    if pair_a == pair_b:
        raise ValueError("diagonal lift needs two distinct pairs")
    phases = np.asarray(phases, dtype=float)
    if phases.shape != (4,):
        raise ValueError(f"Expected four phases, got {phases.shape}")
    upper_a, upper_b = enc.upper(pair_a), enc.upper(pair_b)

    design = np.array([[1, a, b, a * b] for a in (0, 1) for b in (0, 1)], dtype=float)
    solution = np.linalg.lstsq(design, phases, rcond=None)[0]
    scale = max(1.0, float(np.max(np.abs(phases))))
    c, x, y, kappa = (0.0 if abs(value) <= _ZERO_TOL * scale else float(value)
                      for value in solution)

    alpha = {level: value for level, value in ((upper_a, x), (upper_b, y)) if value != 0}
    beta = {(upper_a, upper_b): kappa} if kappa != 0 else {}
    return HamiltonianSpec(J=enc.J, alpha=alpha, beta=beta, offset=c)


def verify_diagram(qubit_op: Union[Operator, np.ndarray], fock_op: Operator,
                   enc: ThetaEncoding) -> float:
    """Frobenius residual ||fock_op Theta - Theta qubit_op||."""
    qubit = qubit_op.dense() if isinstance(qubit_op, Operator) else np.asarray(qubit_op, dtype=complex)
    if qubit.shape != (2 ** enc.n, 2 ** enc.n):
        raise DimensionMismatchError(f"Qubit operator shape {qubit.shape} does not match n={enc.n}")
    if fock_op.J != enc.J:
        raise DimensionMismatchError(f"Fock operator on J={fock_op.J}, encoding on J={enc.J}")
    theta = isometry_matrix(enc).toarray()
    return float(np.linalg.norm(fock_op.dense() @ theta - theta @ qubit))


def restriction_residual(spec: HamiltonianSpec, phases: Sequence[float], pair_a: int,
                         pair_b: int, enc: ThetaEncoding) -> float:
    """Frobenius distance between exp(-i spec) restricted to F and the target diagonal."""
    restricted = restrict(unitary(assemble(spec), 1.0), enc)
    target = diagonal_gate(phases, pair_a, pair_b, enc.n)
    return float(np.linalg.norm(restricted - target))


@dataclass(frozen=True)
class FixedInteraction:
    """The permanent diagonal interaction beta_ij n_i n_j; never a control."""

    beta: Tuple[Tuple[Tuple[int, int], float], ...]
    description: str = ''

    def __post_init__(self):
        items = self.beta.items() if isinstance(self.beta, Mapping) else self.beta
        table = {}
        for (i, j), value in items:
            if i == j:
                raise ValueError(f"fixed beta ({i}, {j}) must couple distinct levels")
            key = (min(i, j), max(i, j))
            table[key] = table.get(key, 0.0) + float(value)
        object.__setattr__(self, 'beta', tuple(sorted(table.items())))

    @classmethod
    def nearest_neighbor(cls, enc: ThetaEncoding, g: Union[float, Sequence[float]]) -> 'FixedInteraction':
        """beta between the upper levels of adjacent pairs, strength g (or one per edge)."""
        strengths = [g] * (enc.n - 1) if np.isscalar(g) else list(g)
        if len(strengths) != enc.n - 1:
            raise ValueError(f"Expected {enc.n - 1} coupling strengths, got {len(strengths)}")
        beta = {(enc.upper(p), enc.upper(p + 1)): float(s) for p, s in enumerate(strengths)}
        return cls(beta=tuple(beta.items()),
                   description=f"nearest-neighbor upper-level coupling over {enc.n} pairs")

    @property
    def table(self) -> Dict[Tuple[int, int], float]:
        return dict(self.beta)

    def spec(self, J: int) -> HamiltonianSpec:
        return HamiltonianSpec(J=J, beta=self.table)

    def qubit_couplings(self, enc: ThetaEncoding) -> Dict[Tuple[int, int], float]:
        """
        Effective qubit-qubit couplings on F.

        n_i n_j between levels of pairs a < b contributes +beta when both levels
        are on the same side (both upper or both lower) and -beta otherwise.
        Beta inside one pair vanishes on F.
        """
        owner = {}
        for p, (lower, upper) in enumerate(enc.pairing):
            owner[lower] = (p, 0)
            owner[upper] = (p, 1)
        couplings: Dict[Tuple[int, int], float] = {}
        for (i, j), value in self.beta:
            if i not in owner or j not in owner:
                raise CompilationError(f"fixed beta ({i}, {j}) lies outside the {enc.J} encoded levels")
            (pa, side_a), (pb, side_b) = owner[i], owner[j]
            if pa == pb:
                continue
            key = (min(pa, pb), max(pa, pb))
            couplings[key] = couplings.get(key, 0.0) + (value if side_a == side_b else -value)
        return {key: value for key, value in couplings.items() if value != 0}

    def to_dict(self) -> Dict:
        return {
            'beta': [{'i': i, 'j': j, 'value': value} for (i, j), value in self.beta],
            'description': self.description,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> 'FixedInteraction':
        beta = tuple(((int(e['i']), int(e['j'])), float(e['value'])) for e in data.get('beta', []))
        return cls(beta=beta, description=data.get('description', ''))


@dataclass(frozen=True)
class PulseSegment:
    """
    Controls held for `duration`.

    duration == 0 is an instantaneous pulse applying exp(-i H_controls);
    duration > 0 evolves under H_controls + H_fixed for that long.
    """

    duration: float
    alpha: Tuple[Tuple[int, float], ...] = ()
    gamma: Tuple[Tuple[Tuple[int, int], complex], ...] = ()
    label: str = ''

    def __post_init__(self):
        duration = float(self.duration)
        if not np.isfinite(duration) or duration < 0:
            raise ValueError(f"Segment duration must be finite and non-negative, got {duration}")
        alpha = self.alpha.items() if isinstance(self.alpha, Mapping) else self.alpha
        gamma = self.gamma.items() if isinstance(self.gamma, Mapping) else self.gamma
        object.__setattr__(self, 'duration', duration)
        object.__setattr__(self, 'alpha', tuple(sorted((int(i), float(a)) for i, a in alpha)))
        object.__setattr__(self, 'gamma', tuple(sorted(
            ((int(i), int(j)), complex(g)) for (i, j), g in gamma)))

    @classmethod
    def from_spec(cls, duration: float, spec: HamiltonianSpec, label: str = '') -> 'PulseSegment':
        """Turn a lifted spec into controls; anything beyond field and tunneling is refused."""
        if spec.beta or spec.one_body or spec.two_body:
            raise CompilationError("controls may only set external fields and tunneling")
        return cls(duration=duration, alpha=spec.alpha, gamma=spec.gamma, label=label)

    @property
    def is_pulse(self) -> bool:
        return self.duration == 0.0

    def control_spec(self, J: int) -> HamiltonianSpec:
        return HamiltonianSpec(J=J, alpha=dict(self.alpha), gamma=dict(self.gamma))

    def to_dict(self, J: int) -> Dict:
        alpha = [0.0] * J
        for i, value in self.alpha:
            alpha[i] = value
        return {
            'duration': self.duration,
            'alpha': alpha,
            'gamma': [{'i': i, 'j': j, 're': g.real, 'im': g.imag} for (i, j), g in self.gamma],
            'label': self.label,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> 'PulseSegment':
        alpha = {i: float(a) for i, a in enumerate(data.get('alpha', [])) if a != 0}
        gamma = {(int(e['i']), int(e['j'])): complex(e.get('re', 0.0), e.get('im', 0.0))
                 for e in data.get('gamma', [])}
        return cls(duration=data['duration'], alpha=alpha, gamma=gamma, label=data.get('label', ''))


@dataclass(frozen=True)
class PulseSchedule:
    """Time-ordered control segments run while the fixed interaction acts."""

    encoding: ThetaEncoding
    fixed: FixedInteraction
    segments: Tuple[PulseSegment, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, 'segments', tuple(self.segments))

    @property
    def segment_count(self) -> int:
        return len(self.segments)

    @property
    def pulse_count(self) -> int:
        return sum(1 for segment in self.segments if segment.is_pulse)

    @property
    def total_duration(self) -> float:
        return float(sum(segment.duration for segment in self.segments))

    def statistics(self) -> Dict:
        return {
            'segment_count': self.segment_count,
            'pulse_count': self.pulse_count,
            'total_duration': self.total_duration,
        }

    def to_dict(self) -> Dict:
        header = {'n': self.encoding.n, 'J': self.encoding.J,
                  'pairing': self.encoding.to_list(), 'fermi_position': self.encoding.fermi_position}
        header.update({'fixed_' + key: value for key, value in self.fixed.to_dict().items()})
        return {
            'header': header,
            'segments': [segment.to_dict(self.encoding.J) for segment in self.segments],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> 'PulseSchedule':
        header = data['header']
        encoding = ThetaEncoding(n=int(header['n']),
                                 pairing=tuple(tuple(p) for p in header['pairing']),
                                 fermi_position=int(header['fermi_position']))
        fixed = FixedInteraction.from_dict({'beta': header.get('fixed_beta', []),
                                            'description': header.get('fixed_description', '')})
        segments = tuple(PulseSegment.from_dict(s) for s in data.get('segments', []))
        return cls(encoding=encoding, fixed=fixed, segments=segments)


def echo_flip_set(target: Tuple[int, int], couplings: Mapping[Tuple[int, int], float],
                  n: int) -> FrozenSet[int]:
    """
    Qubits to flip at the midpoint of an entangling segment.

    A coupling keeps its entangling phase when both or neither of its qubits
    are flipped and is refocused when exactly one is, so the target edge
    needs equal labels and every other coupled edge different labels.

    Raises:
        CompilationError: If the coupling graph admits no such labelling
    """
    target = (min(target), max(target))
    neighbors: Dict[int, List[Tuple[int, int]]] = {q: [] for q in range(n)}
    for (a, b) in couplings:
        parity = 0 if (a, b) == target else 1
        neighbors[a].append((b, parity))
        neighbors[b].append((a, parity))

    label: Dict[int, int] = {}
    for start in [target[0]] + list(range(n)):
        if start in label:
            continue
        label[start] = 0
        queue = deque([start])
        while queue:
            q = queue.popleft()
            for other, parity in neighbors[q]:
                wanted = label[q] ^ parity
                if other not in label:
                    label[other] = wanted
                    queue.append(other)
                elif label[other] != wanted:
                    raise CompilationError(
                        f"cannot refocus the fixed interaction around edge {target}: "
                        f"conflicting echo at qubits {q} and {other}"
                    )
    return frozenset(q for q, value in label.items() if value)


def _coupling_path(a: int, b: int, couplings: Mapping[Tuple[int, int], float], n: int) -> List[int]:
    neighbors: Dict[int, List[int]] = {q: [] for q in range(n)}
    for (u, v) in couplings:
        neighbors[u].append(v)
        neighbors[v].append(u)
    previous = {a: None}
    queue = deque([a])
    while queue:
        q = queue.popleft()
        for other in sorted(neighbors[q]):
            if other not in previous:
                previous[other] = q
                queue.append(other)
    if b not in previous:
        raise CompilationError(f"qubits {a} and {b} are not connected by the fixed interaction")
    path = [b]
    while path[-1] != a:
        path.append(previous[path[-1]])
    return path[::-1]


def _swap_gates(u: int, v: int) -> List[GateOp]:
    """SWAP as three CNOTs, each CNOT as h . CZ . h on its target."""
    gates: List[GateOp] = []
    for control, target in ((u, v), (v, u), (u, v)):
        gates.extend([
            GateOp('h', (target,)),
            GateOp(DIAG, (control, target), CZ_PHASES),
            GateOp('h', (target,)),
        ])
    return gates


def route_circuit(circuit: Circuit, couplings: Mapping[Tuple[int, int], float]) -> Circuit:
    """
    Move diagonal gates onto coupled qubit pairs.

    A diag gate on uncoupled qubits (a, b) swaps a along a shortest coupling
    path until it neighbours b, applies the gate there and swaps back. The
    routed circuit has the same unitary.
    """
    routed: List[GateOp] = []
    for gate in circuit.gates:
        if not gate.is_diagonal:
            routed.append(gate)
            continue
        a, b = gate.targets
        if (min(a, b), max(a, b)) in couplings or not is_entangling(gate.params):
            routed.append(gate)
            continue
        path = _coupling_path(a, b, couplings, circuit.n)
        logger.debug("Routing diag(%d, %d) along %s", a, b, path)
        swaps: List[GateOp] = []
        for u, v in zip(path[:-2], path[1:-1]):
            swaps.extend(_swap_gates(u, v))
        routed.extend(swaps)
        routed.append(GateOp(DIAG, (path[-2], b), gate.params))
        routed.extend(reversed(swaps))
    return Circuit(n=circuit.n, gates=tuple(routed))


class PulseCompiler:
    """Compile qubit circuits into pulse schedules for one encoding and fixed interaction."""

    def __init__(self, fixed: FixedInteraction, enc: ThetaEncoding):
        """
        Initialize the compiler.

        Args:
            fixed: The permanent diagonal interaction
            enc: Dual-rail encoding of the qubits

        Raises:
            CompilationError: If the interaction touches levels outside the encoding
        """
        self.fixed = fixed
        self.enc = enc
        self.couplings = fixed.qubit_couplings(enc)
        occupations = basis_occupations(enc.J)[np.array(subspace_F(enc).basis_map)]
        # Energy of the fixed interaction on every theta(|x>)
        self._fixed_energy = np.zeros(2 ** enc.n)
        for (i, j), value in fixed.beta:
            self._fixed_energy += value * occupations[:, i] * occupations[:, j]
        self._bits = np.array([qubit_bits(x, enc.n) for x in range(2 ** enc.n)], dtype=float)

    def compile(self, circuit: Circuit) -> PulseSchedule:
        if circuit.n != self.enc.n:
            raise DimensionMismatchError(f"Circuit on {circuit.n} qubits, encoding on {self.enc.n}")
        routed = route_circuit(circuit, self.couplings)
        segments: List[PulseSegment] = []
        for gate in routed.gates:
            if gate.is_diagonal:
                segments.extend(self._diagonal_segments(gate))
            else:
                pulse = self._one_qubit_pulse(one_qubit_matrix(gate), gate.targets[0],
                                              label=gate.describe())
                if pulse is not None:
                    segments.append(pulse)
        schedule = PulseSchedule(encoding=self.enc, fixed=self.fixed, segments=tuple(segments))
        logger.info("Compiled %d gates into %d segments (total duration %.6g)",
                    len(circuit), schedule.segment_count, schedule.total_duration)
        return schedule

    def _one_qubit_pulse(self, matrix: np.ndarray, q: int, label: str) -> Optional[PulseSegment]:
        spec = lift_one_qubit(hamiltonian_log(matrix), q, self.enc)
        if not spec.has_coefficients():
            return None
        return PulseSegment.from_spec(0.0, spec, label=label)

    def _flip_pulse(self, flips: FrozenSet[int]) -> PulseSegment:
        x = np.array([[0, 1], [1, 0]], dtype=complex)
        spec = HamiltonianSpec(J=self.enc.J)
        for q in sorted(flips):
            spec = spec.merge(lift_one_qubit(hamiltonian_log(x), q, self.enc))
        return PulseSegment.from_spec(0.0, spec, label='echo flip ' + ' '.join(f'q{q}' for q in sorted(flips)))

    def _diagonal_segments(self, gate: GateOp) -> List[PulseSegment]:
        a, b = gate.targets
        n = self.enc.n
        kappa = entangling_phase(gate.params)
        segments: List[PulseSegment] = []
        accumulated = np.zeros(2 ** n)

        if is_entangling(gate.params):
            g = self.couplings.get((min(a, b), max(a, b)), 0.0)
            if g == 0.0:
                raise CompilationError(
                    f"entangling diag on qubits ({a}, {b}) needs a nonzero fixed coupling"
                )
            duration = float(np.mod(kappa / g, TWO_PI / abs(g)))
            flips = echo_flip_set((a, b), self.couplings, n)
            label = f"free evolution for diag {a} {b}"
            if flips:
                mask = sum(1 << (n - 1 - q) for q in flips)
                flipped = np.arange(2 ** n) ^ mask
                flip = self._flip_pulse(flips)
                segments.extend([
                    PulseSegment(duration / 2, label=label),
                    flip,
                    PulseSegment(duration / 2, label=label),
                    flip,
                ])
                accumulated += 0.5 * duration * (self._fixed_energy + self._fixed_energy[flipped])
            else:
                segments.append(PulseSegment(duration, label=label))
                accumulated += duration * self._fixed_energy

        correction = self._local_correction(gate, accumulated)
        if correction:
            segments.append(PulseSegment(0.0, alpha=correction, label=f"phase correction diag {a} {b}"))
        return segments

    def _local_correction(self, gate: GateOp, accumulated: np.ndarray) -> Dict[int, float]:
        """
        Fields on the upper levels that turn the accumulated phases into the gate.

        The missing phase is fitted as c + sum_s l_s xi_s + sum q_st xi_s xi_t;
        every q_st must vanish modulo 2*pi, otherwise the echo did not
        decouple the idle couplings.
        """
        n = self.enc.n
        a, b = gate.targets
        target = np.asarray(gate.params).reshape(2, 2)[
            self._bits[:, a].astype(int), self._bits[:, b].astype(int)]
        missing = target - accumulated

        pairs = [(s, t) for s in range(n) for t in range(s + 1, n)]
        columns = [np.ones(2 ** n)] + [self._bits[:, s] for s in range(n)]
        columns += [self._bits[:, s] * self._bits[:, t] for s, t in pairs]
        design = np.column_stack(columns)
        coefficients = np.linalg.lstsq(design, missing, rcond=None)[0]
        fit_error = float(np.max(np.abs(design @ coefficients - missing)))
        if fit_error > 1e-8:
            raise CompilationError(f"accumulated phases are not quadratic (fit error {fit_error:.3e})")
        for (s, t), value in zip(pairs, coefficients[1 + n:]):
            if abs(wrap_phase(value)) > 1e-8:
                raise CompilationError(
                    f"coupling between qubits {s} and {t} keeps an entangling phase {value:.6g}"
                )
        correction = {}
        for s, value in enumerate(coefficients[1:1 + n]):
            value = wrap_phase(value)
            if abs(value) > 1e-12:
                correction[self.enc.upper(s)] = value
        return correction


def compile_circuit(circuit: Circuit, fixed: FixedInteraction, enc: ThetaEncoding) -> PulseSchedule:
    """
    Compile a circuit into a field + tunneling schedule under a fixed interaction.

    Raises:
        CompilationError: Unsupported interaction topology, or an entangling
            gate on qubits with zero coupling
    """
    return PulseCompiler(fixed, enc).compile(circuit)


def execute_schedule(schedule: PulseSchedule) -> Operator:
    """
    End-to-end Fock evolution E of a schedule.

    Pulses (zero duration) apply exp(-i H_controls); timed segments apply
    exp(-i (H_controls + H_fixed) t).
    """
    enc = schedule.encoding
    fixed_spec = schedule.fixed.spec(enc.J)
    total = np.eye(2 ** enc.J, dtype=complex)
    for segment in schedule.segments:
        controls = segment.control_spec(enc.J)
        if segment.is_pulse:
            step = unitary(assemble(controls), 1.0)
        else:
            step = unitary(assemble(controls.merge(fixed_spec)), segment.duration)
        total = step.dense() @ total
    return Operator(total, enc.J)


def process_fidelity(U: np.ndarray, W: np.ndarray) -> float:
    """|Tr(U^+ W)| / dim, insensitive to a global phase."""
    U = np.asarray(U, dtype=complex)
    W = np.asarray(W, dtype=complex)
    if U.shape != W.shape:
        raise DimensionMismatchError(f"Shapes {U.shape} and {W.shape} differ")
    return float(min(1.0, abs(np.trace(U.conj().T @ W)) / U.shape[0]))


def one_qubit_diagram_residual(matrix: np.ndarray, q: int, enc: ThetaEncoding) -> float:
    """verify_diagram for a one-qubit gate against its lifted pulse."""
    lifted = unitary(assemble(lift_one_qubit(hamiltonian_log(matrix), q, enc)), 1.0)
    return verify_diagram(embed_one_qubit(matrix, q, enc.n), lifted, enc)


def diagonal_diagram_residual(phases: Sequence[float], a: int, b: int, enc: ThetaEncoding) -> float:
    """verify_diagram for a two-qubit diagonal against its lifted evolution."""
    lifted = unitary(assemble(lift_diagonal(phases, a, b, enc)), 1.0)
    return verify_diagram(diagonal_gate(phases, a, b, enc.n), lifted, enc)
