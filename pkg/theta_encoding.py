"""
Dual-rail map theta from n-qubit Hilbert space into the Fock subspace F.

Levels are laid out in the global energy order (n, ..., 2, 1 | 1', 2', ..., n')
with the Fermi bound at position n. Qubit q uses pair q: its lower level sits
at position n-1-q and its upper level at position n+q. |0>_q means the lower
level is occupied, |1>_q the upper one.

Qubit basis indices are big-endian: |xi_0 xi_1 ... xi_{n-1}> has index
sum(xi_q * 2**(n-1-q)).
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from scipy import sparse

from config.settings import MAX_QUBITS
from fock_core import (
    DimensionMismatchError,
    FockState,
    FockVector,
    Operator,
    apply_annihilate,
    apply_create,
    check_level_count,
)

logger = logging.getLogger(__name__)


class EncodingError(ValueError):
    """Invalid pairing or a Fock vector with no component in F."""


class SignInconsistencyError(ValueError):
    """Within-pair tunneling does not act with one sign on all of F."""


@dataclass(frozen=True)
class ThetaEncoding:
    """Level pairing (lower, upper) per qubit and the position of the Fermi bound."""

    n: int
    pairing: Tuple[Tuple[int, int], ...]
    fermi_position: int

    def __post_init__(self):
        if int(self.n) != self.n or not 1 <= self.n <= MAX_QUBITS:
            raise EncodingError(f"Qubit count must be in [1, {MAX_QUBITS}], got {self.n}")
        pairing = tuple((int(lower), int(upper)) for lower, upper in self.pairing)
        if len(pairing) != self.n:
            raise EncodingError(f"Expected {self.n} pairs, got {len(pairing)}")
        levels = sorted(level for pair in pairing for level in pair)
        if levels != list(range(2 * self.n)):
            raise EncodingError(f"Pairing {pairing} is not a perfect matching of {2 * self.n} levels")
        object.__setattr__(self, 'pairing', pairing)

    @property
    def J(self) -> int:
        return 2 * self.n

    def lower(self, pair: int) -> int:
        return self.pairing[self._check_pair(pair)][0]

    def upper(self, pair: int) -> int:
        return self.pairing[self._check_pair(pair)][1]

    def level_positions(self, pair: int) -> Tuple[int, int]:
        return self.pairing[self._check_pair(pair)]

    def _check_pair(self, pair: int) -> int:
        if int(pair) != pair or not 0 <= pair < self.n:
            raise EncodingError(f"Pair {pair} out of range for n={self.n}")
        return int(pair)

    def to_list(self) -> list:
        return [list(pair) for pair in self.pairing]


def make_encoding(n: int) -> ThetaEncoding:
    """
    Canonical pairing: k-th level below the Fermi bound with the k-th above.

    Raises:
        EncodingError: If n is outside [1, MAX_QUBITS]
    """
    if int(n) != n or not 1 <= n <= MAX_QUBITS:
        raise EncodingError(f"Qubit count must be in [1, {MAX_QUBITS}], got {n}")
    check_level_count(2 * n)
    pairing = tuple((n - 1 - q, n + q) for q in range(n))
    return ThetaEncoding(n=n, pairing=pairing, fermi_position=n)


@dataclass(frozen=True)
class QubitVector:
    """Amplitudes over the 2**n qubit basis (big-endian)."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amplitudes = np.array(self.amplitudes, dtype=complex).reshape(-1)
        size = amplitudes.shape[0]
        if size < 2 or size & (size - 1):
            raise DimensionMismatchError(f"Qubit vector length {size} is not a power of two")
        amplitudes.setflags(write=False)
        object.__setattr__(self, 'amplitudes', amplitudes)

    @classmethod
    def basis(cls, bits: Union[str, Sequence[int]]) -> 'QubitVector':
        bits = [int(b) for b in bits]
        amplitudes = np.zeros(2 ** len(bits), dtype=complex)
        amplitudes[qubit_index(bits)] = 1.0
        return cls(amplitudes)

    @property
    def n(self) -> int:
        return int(self.amplitudes.shape[0]).bit_length() - 1

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def inner(self, other: 'QubitVector') -> complex:
        if other.n != self.n:
            raise DimensionMismatchError(f"Qubit vectors on n={self.n} and n={other.n}")
        return complex(np.vdot(self.amplitudes, other.amplitudes))


def qubit_index(bits: Sequence[int]) -> int:
    index = 0
    for bit in bits:
        index = (index << 1) | int(bit)
    return index


def qubit_bits(index: int, n: int) -> Tuple[int, ...]:
    return tuple((index >> (n - 1 - q)) & 1 for q in range(n))


def qubit_occupations(bits: Sequence[int], enc: ThetaEncoding) -> FockState:
    """Fock basis state theta(|bits>)."""
    if len(bits) != enc.n:
        raise DimensionMismatchError(f"Expected {enc.n} qubit values, got {len(bits)}")
    occupations = [0] * enc.J
    for q, bit in enumerate(bits):
        lower, upper = enc.pairing[q]
        occupations[upper if bit else lower] = 1
    return FockState(tuple(occupations))


@dataclass(frozen=True)
class SubspaceF:
    """F = F_1 x ... x F_n: basis_map[x] is the Fock index of theta(|x>)."""

    encoding: ThetaEncoding
    basis_map: Tuple[int, ...]

    @property
    def dim(self) -> int:
        return len(self.basis_map)


@lru_cache(maxsize=64)
def subspace_F(enc: ThetaEncoding) -> SubspaceF:
    basis_map = tuple(
        qubit_occupations(qubit_bits(x, enc.n), enc).index for x in range(2 ** enc.n)
    )
    return SubspaceF(encoding=enc, basis_map=basis_map)


def _basis_array(enc: ThetaEncoding) -> np.ndarray:
    return np.array(subspace_F(enc).basis_map, dtype=np.int64)


def encode(v: QubitVector, enc: ThetaEncoding) -> FockVector:
    """
    theta(v): place qubit amplitudes on the F basis states.

    Raises:
        DimensionMismatchError: If v is not on n qubits
    """
    if v.n != enc.n:
        raise DimensionMismatchError(f"Qubit vector on n={v.n}, encoding on n={enc.n}")
    amplitudes = np.zeros(2 ** enc.J, dtype=complex)
    amplitudes[_basis_array(enc)] = v.amplitudes
    return FockVector(amplitudes, enc.J)


def leakage(w: FockVector, enc: ThetaEncoding) -> float:
    """Squared norm of the component of w outside F, relative to ||w||^2."""
    if w.J != enc.J:
        raise DimensionMismatchError(f"Fock vector on J={w.J}, encoding on J={enc.J}")
    total = float(np.vdot(w.amplitudes, w.amplitudes).real)
    if total == 0:
        raise EncodingError("Leakage of the zero vector is undefined")
    inside = w.amplitudes[_basis_array(enc)]
    return max(0.0, 1.0 - float(np.vdot(inside, inside).real) / total)


def decode(w: FockVector, enc: ThetaEncoding) -> Tuple[Optional[QubitVector], float]:
    """
    Left inverse of theta: project onto F and renormalize.

    Returns:
        (qubit vector, leakage). The qubit vector is None when w has no
        component in F (leakage 1).
    """
    leak = leakage(w, enc)
    inside = w.amplitudes[_basis_array(enc)]
    norm = float(np.linalg.norm(inside))
    if norm == 0.0:
        logger.warning("Fock vector lies entirely outside F; qubit state undefined")
        return None, 1.0
    return QubitVector(inside / norm), leak


def projector_F(enc: ThetaEncoding) -> Operator:
    """Orthogonal projector onto F (rank 2**n)."""
    diagonal = np.zeros(2 ** enc.J, dtype=complex)
    diagonal[_basis_array(enc)] = 1.0
    return Operator(sparse.diags(diagonal, format='csr'), enc.J)


def isometry_matrix(enc: ThetaEncoding) -> sparse.csr_matrix:
    """The 2**J x 2**n matrix of theta."""
    rows = _basis_array(enc)
    columns = np.arange(2 ** enc.n)
    values = np.ones(2 ** enc.n, dtype=complex)
    return sparse.csr_matrix((values, (rows, columns)), shape=(2 ** enc.J, 2 ** enc.n))


def restrict(op: Operator, enc: ThetaEncoding) -> np.ndarray:
    """Theta^+ op Theta: the action of a Fock operator on F in qubit coordinates."""
    if op.J != enc.J:
        raise DimensionMismatchError(f"Operator on J={op.J}, encoding on J={enc.J}")
    rows = _basis_array(enc)
    if op.is_sparse:
        return op.matrix[rows, :][:, rows].toarray()
    return np.asarray(op.matrix)[np.ix_(rows, rows)]


def tunneling_sign(pair: int, enc: ThetaEncoding) -> int:
    """
    The sign with which a_lower^+ a_upper (and its adjoint) acts on F.

    Enumerates every F basis state; with the canonical pairing exactly
    half of the levels between lower and upper are occupied, so the sign
    is the same for all of them.

    Raises:
        SignInconsistencyError: If two F basis states disagree (possible
            for crossing, non-canonical pairings)
    """
    lower, upper = enc.level_positions(pair)
    signs = set()
    for x in range(2 ** enc.n):
        bits = qubit_bits(x, enc.n)
        state = qubit_occupations(bits, enc)
        # a_lower^+ a_upper on |1>_pair, its adjoint a_upper^+ a_lower on |0>_pair
        source, target = (upper, lower) if bits[pair] else (lower, upper)
        first = apply_annihilate(source, state)
        result = apply_create(target, first.state)
        flipped = list(bits)
        flipped[pair] ^= 1
        expected = qubit_occupations(flipped, enc)
        if result.vanished or result.state != expected:
            raise SignInconsistencyError(f"Within-pair hop on pair {pair} leaves F from {state}")
        signs.add(first.sign * result.sign)
    if len(signs) != 1:
        logger.warning("Tunneling sign on pair %d depends on the state: %s", pair, sorted(signs))
        raise SignInconsistencyError(f"Tunneling sign on pair {pair} is not constant over F")
    return signs.pop()
