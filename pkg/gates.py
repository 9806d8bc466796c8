"""
Circuit model and qubit-side (Hilbert space) gate matrices.

Two-qubit diagonal gates carry phases (phi00, phi01, phi10, phi11) and act as
diag(exp(-i * phi)), the first bit being the first target. Qubit ordering is
big-endian, matching theta_encoding.
"""

from dataclasses import dataclass
from functools import reduce
from typing import Dict, Sequence, Tuple

import numpy as np
import scipy.linalg

from config.settings import MAX_QUBITS

DIAG = 'diag'

# Named one-qubit gates and their parameter counts
ONE_QUBIT_ARITY: Dict[str, int] = {
    'x': 0,
    'y': 0,
    'z': 0,
    'h': 0,
    's': 0,
    't': 0,
    'phase': 1,
    'rot': 4,
}

_FIXED_GATES = {
    'x': np.array([[0, 1], [1, 0]], dtype=complex),
    'y': np.array([[0, -1j], [1j, 0]], dtype=complex),
    'z': np.array([[1, 0], [0, -1]], dtype=complex),
    'h': np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2),
    's': np.array([[1, 0], [0, 1j]], dtype=complex),
    't': np.array([[1, 0], [0, np.exp(1j * np.pi / 4)]], dtype=complex),
}


@dataclass(frozen=True)
class GateOp:
    """One gate application: a named one-qubit gate or a two-qubit diagonal."""

    name: str
    targets: Tuple[int, ...]
    params: Tuple[float, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, 'targets', tuple(int(q) for q in self.targets))
        object.__setattr__(self, 'params', tuple(float(p) for p in self.params))
        if self.name == DIAG:
            if len(self.targets) != 2 or len(self.params) != 4:
                raise ValueError("diag gates need two targets and four phases")
            if self.targets[0] == self.targets[1]:
                raise ValueError("diag gate targets must differ")
        elif self.name in ONE_QUBIT_ARITY:
            if len(self.targets) != 1:
                raise ValueError(f"{self.name} acts on one qubit")
            if len(self.params) != ONE_QUBIT_ARITY[self.name]:
                raise ValueError(
                    f"{self.name} takes {ONE_QUBIT_ARITY[self.name]} parameters, got {len(self.params)}"
                )
        else:
            raise ValueError(f"unknown gate '{self.name}'")
        if not all(np.isfinite(self.params)):
            raise ValueError(f"{self.name} parameters must be finite")

    @property
    def is_diagonal(self) -> bool:
        return self.name == DIAG

    def describe(self) -> str:
        params = ' '.join(f'{p:g}' for p in self.params)
        targets = ' '.join(str(q) for q in self.targets)
        return f"{self.name} {targets} {params}".strip()


@dataclass(frozen=True)
class Circuit:
    """n qubits and an ordered tuple of gate applications."""

    n: int
    gates: Tuple[GateOp, ...] = ()

    def __post_init__(self):
        if int(self.n) != self.n or not 1 <= self.n <= MAX_QUBITS:
            raise ValueError(f"Qubit count must be in [1, {MAX_QUBITS}], got {self.n}")
        gates = tuple(self.gates)
        for gate in gates:
            for q in gate.targets:
                if not 0 <= q < self.n:
                    raise ValueError(f"target {q} out of range for {self.n} qubits")
        object.__setattr__(self, 'gates', gates)

    def __len__(self) -> int:
        return len(self.gates)

    def has_entangling_gates(self) -> bool:
        return any(gate.is_diagonal and is_entangling(gate.params) for gate in self.gates)


def one_qubit_matrix(gate: GateOp) -> np.ndarray:
    """2x2 unitary of a named one-qubit gate."""
    if gate.name in _FIXED_GATES:
        return _FIXED_GATES[gate.name].copy()
    if gate.name == 'phase':
        (theta,) = gate.params
        return np.diag([1.0, np.exp(1j * theta)]).astype(complex)
    if gate.name == 'rot':
        d1, d2, re_d, im_d = gate.params
        d = complex(re_d, im_d)
        return scipy.linalg.expm(-1j * np.array([[d1, d], [np.conj(d), d2]], dtype=complex))
    raise ValueError(f"{gate.name} is not a one-qubit gate")


def embed_one_qubit(matrix: np.ndarray, q: int, n: int) -> np.ndarray:
    """I_(2**q) x G x I_(2**(n-q-1))."""
    if not 0 <= q < n:
        raise ValueError(f"qubit {q} out of range for n={n}")
    factors = [np.eye(2 ** q), np.asarray(matrix, dtype=complex), np.eye(2 ** (n - q - 1))]
    return reduce(np.kron, factors)


def phase_table(phases: Sequence[float], a: int, b: int, n: int) -> np.ndarray:
    """phi_{xi_a xi_b} for every basis state of n qubits."""
    phases = np.asarray(phases, dtype=float).reshape(2, 2)
    indices = np.arange(2 ** n)
    bit_a = (indices >> (n - 1 - a)) & 1
    bit_b = (indices >> (n - 1 - b)) & 1
    return phases[bit_a, bit_b]


def diagonal_gate(phases: Sequence[float], a: int, b: int, n: int) -> np.ndarray:
    """Dense diag(exp(-i phi_{xi_a xi_b})) on n qubits."""
    if a == b or not (0 <= a < n and 0 <= b < n):
        raise ValueError(f"invalid diagonal targets ({a}, {b}) for n={n}")
    return np.diag(np.exp(-1j * phase_table(phases, a, b, n)))


def entangling_phase(phases: Sequence[float]) -> float:
    """kappa = phi00 - phi01 - phi10 + phi11, the non-local part of a diagonal gate."""
    phi00, phi01, phi10, phi11 = phases
    return phi00 - phi01 - phi10 + phi11


def is_entangling(phases: Sequence[float], tol: float = 1e-9) -> bool:
    """Schmidt rank of the 2x2 matrix exp(-i phi_ab) is greater than one."""
    matrix = np.exp(-1j * np.asarray(phases, dtype=float)).reshape(2, 2)
    return int(np.linalg.matrix_rank(matrix, tol=tol)) > 1


def gate_unitary(gate: GateOp, n: int) -> np.ndarray:
    if gate.is_diagonal:
        a, b = gate.targets
        return diagonal_gate(gate.params, a, b, n)
    return embed_one_qubit(one_qubit_matrix(gate), gate.targets[0], n)


def circuit_unitary(circuit: Circuit) -> np.ndarray:
    """Product of the gate unitaries, first gate applied first."""
    U = np.eye(2 ** circuit.n, dtype=complex)
    for gate in circuit.gates:
        U = gate_unitary(gate, circuit.n) @ U
    return U
