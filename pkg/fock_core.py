"""
Occupation-number basis and fermionic ladder operators.

A Fock basis state over J levels is an occupation bit-vector |n_0, ..., n_{J-1}>.
Its basis index is sum(n_k * 2**k): bit 0 is the first level of the global
energy order. Ladder operators carry the sign (-1)**sigma_j where sigma_j counts
the occupied levels strictly below position j.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache, reduce
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from scipy import sparse

from config.settings import MAX_LEVELS, DENSE_LEVEL_LIMIT, HERMITIAN_TOL, UNITARY_TOL

logger = logging.getLogger(__name__)

CREATE = 'create'
ANNIHILATE = 'annihilate'
LADDER_KINDS = (CREATE, ANNIHILATE)


class LevelIndexError(ValueError):
    """Level position outside [0, J)."""


class LevelCapError(ValueError):
    """Level count beyond what the simulator is allowed to allocate."""


class DimensionMismatchError(ValueError):
    """Operator and vector (or two operators) live on different spaces."""


class NonHermitianError(ValueError):
    """An operator required to be Hermitian is not."""


def check_level_count(J: int, limit: int = MAX_LEVELS) -> int:
    """Validate a level count against the resource cap."""
    if int(J) != J or J < 1:
        raise LevelIndexError(f"Level count must be a positive integer, got {J}")
    if J > limit:
        raise LevelCapError(f"Level count {J} exceeds the cap of {limit}")
    return int(J)


def check_level(j: int, J: int) -> int:
    """Validate a level position for a J-level system."""
    if int(j) != j or not 0 <= j < J:
        raise LevelIndexError(f"Level {j} out of range for J={J}")
    return int(j)


@lru_cache(maxsize=None)
def _occupation_table(J: int) -> np.ndarray:
    indices = np.arange(2 ** J, dtype=np.int64)
    table = (indices[:, None] >> np.arange(J, dtype=np.int64)) & 1
    table.setflags(write=False)
    return table


def basis_occupations(J: int) -> np.ndarray:
    """
    Occupation table of the whole basis.

    Returns:
        Read-only integer array of shape (2**J, J); row i holds the
        occupations of basis state i.
    """
    return _occupation_table(check_level_count(J))


@dataclass(frozen=True)
class FockState:
    """One occupation-number basis vector."""

    occupations: Tuple[int, ...]

    def __post_init__(self):
        occupations = tuple(int(n) for n in self.occupations)
        if any(n not in (0, 1) for n in occupations):
            raise ValueError(f"Occupations must be 0 or 1, got {self.occupations}")
        check_level_count(len(occupations))
        object.__setattr__(self, 'occupations', occupations)

    @classmethod
    def from_index(cls, index: int, J: int) -> 'FockState':
        J = check_level_count(J)
        if not 0 <= index < 2 ** J:
            raise LevelIndexError(f"Basis index {index} out of range for J={J}")
        return cls(tuple((index >> k) & 1 for k in range(J)))

    @property
    def J(self) -> int:
        return len(self.occupations)

    @property
    def index(self) -> int:
        return sum(n << k for k, n in enumerate(self.occupations))

    @property
    def particle_number(self) -> int:
        return sum(self.occupations)

    def occupied(self, j: int) -> bool:
        return self.occupations[check_level(j, self.J)] == 1

    def parity_below(self, j: int) -> int:
        """sigma_j: number of occupied levels strictly below position j."""
        return sum(self.occupations[:check_level(j, self.J)])

    def with_occupation(self, j: int, value: int) -> 'FockState':
        occupations = list(self.occupations)
        occupations[check_level(j, self.J)] = value
        return FockState(tuple(occupations))

    def __str__(self) -> str:
        return '|' + ','.join(str(n) for n in self.occupations) + '>'


@dataclass(frozen=True)
class SignedState:
    """Result of a ladder operator on a basis state: sign * state, or zero."""

    state: Optional[FockState]
    sign: int = 1
    vanished: bool = False

    @classmethod
    def zero(cls) -> 'SignedState':
        return cls(state=None, sign=0, vanished=True)


def apply_annihilate(j: int, s: FockState) -> SignedState:
    """
    Apply a_j to a basis state.

    Args:
        j: Level position
        s: Basis state

    Returns:
        Vanished result if level j is empty, otherwise s with level j
        emptied and sign (-1)**sigma_j.

    Raises:
        LevelIndexError: If j is outside [0, J)
    """
    check_level(j, s.J)
    if not s.occupied(j):
        return SignedState.zero()
    sign = -1 if s.parity_below(j) % 2 else 1
    return SignedState(state=s.with_occupation(j, 0), sign=sign)


def apply_create(j: int, s: FockState) -> SignedState:
    """Apply a_j^+ to a basis state (vanishes when level j is occupied)."""
    check_level(j, s.J)
    if s.occupied(j):
        return SignedState.zero()
    sign = -1 if s.parity_below(j) % 2 else 1
    return SignedState(state=s.with_occupation(j, 1), sign=sign)


MatrixLike = Union[np.ndarray, sparse.spmatrix]


@dataclass(frozen=True)
class Operator:
    """
    Linear operator on the 2**J dimensional Fock space.

    The matrix is kept either as a scipy CSR matrix or as a dense numpy array.
    Setting ``hermitian`` or ``unitary`` makes the constructor verify the
    property to within the configured tolerance.
    """

    matrix: MatrixLike
    J: int
    hermitian: bool = False
    unitary: bool = False

    # numpy scalars defer to __rmul__ instead of broadcasting
    __array_ufunc__ = None

    def __post_init__(self):
        J = check_level_count(self.J)
        matrix = self.matrix
        if sparse.issparse(matrix):
            matrix = sparse.csr_matrix(matrix, dtype=complex)
        else:
            matrix = np.array(matrix, dtype=complex)
            matrix.setflags(write=False)
        if matrix.shape != (2 ** J, 2 ** J):
            raise DimensionMismatchError(
                f"Matrix shape {matrix.shape} does not match J={J} (dim {2 ** J})"
            )
        object.__setattr__(self, 'matrix', matrix)
        if self.hermitian and self.hermiticity_residual() > HERMITIAN_TOL:
            raise NonHermitianError(
                f"Operator flagged Hermitian has residual {self.hermiticity_residual():.3e}"
            )
        if self.unitary and self.unitarity_residual() > UNITARY_TOL:
            raise ValueError(
                f"Operator flagged unitary has residual {self.unitarity_residual():.3e}"
            )

    @property
    def dim(self) -> int:
        return 2 ** self.J

    @property
    def is_sparse(self) -> bool:
        return sparse.issparse(self.matrix)

    def dense(self) -> np.ndarray:
        """Dense copy of the matrix (bounded by the dense level limit)."""
        if self.J > DENSE_LEVEL_LIMIT:
            raise LevelCapError(
                f"Dense matrices are limited to J <= {DENSE_LEVEL_LIMIT}, got J={self.J}"
            )
        if self.is_sparse:
            return self.matrix.toarray()
        return np.array(self.matrix)

    def adjoint(self) -> 'Operator':
        return Operator(self.matrix.conj().T, self.J)

    def hermiticity_residual(self) -> float:
        """Frobenius norm of H - H^+."""
        diff = self.matrix - self.matrix.conj().T
        if sparse.issparse(diff):
            return float(np.linalg.norm(sparse.csr_matrix(diff).data))
        return float(np.linalg.norm(diff))

    def unitarity_residual(self) -> float:
        """Frobenius norm of U^+ U - I."""
        m = self.dense()
        return float(np.linalg.norm(m.conj().T @ m - np.eye(self.dim)))

    def is_hermitian(self, tol: float = HERMITIAN_TOL) -> bool:
        return self.hermiticity_residual() <= tol

    def is_unitary(self, tol: float = UNITARY_TOL) -> bool:
        return self.unitarity_residual() <= tol

    def _check_same_space(self, other: 'Operator'):
        if not isinstance(other, Operator):
            raise TypeError(f"Expected Operator, got {type(other).__name__}")
        if other.J != self.J:
            raise DimensionMismatchError(f"Operators on J={self.J} and J={other.J}")

    def __add__(self, other: 'Operator') -> 'Operator':
        self._check_same_space(other)
        if self.is_sparse and other.is_sparse:
            return Operator(self.matrix + other.matrix, self.J)
        return Operator(self.dense() + other.dense(), self.J)

    def __sub__(self, other: 'Operator') -> 'Operator':
        return self + (-1.0) * other

    def __neg__(self) -> 'Operator':
        return (-1.0) * self

    def __mul__(self, scalar: complex) -> 'Operator':
        if not np.isscalar(scalar):
            return NotImplemented
        return Operator(self.matrix * scalar, self.J)

    __rmul__ = __mul__

    def __matmul__(self, other: 'Operator') -> 'Operator':
        self._check_same_space(other)
        if self.is_sparse and other.is_sparse:
            return Operator(self.matrix @ other.matrix, self.J)
        return Operator(self.dense() @ other.dense(), self.J)


@dataclass(frozen=True)
class FockVector:
    """Complex amplitudes over all 2**J Fock basis states."""

    amplitudes: np.ndarray
    J: int

    def __post_init__(self):
        J = check_level_count(self.J)
        amplitudes = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amplitudes.shape != (2 ** J,):
            raise DimensionMismatchError(
                f"Vector of length {amplitudes.shape[0]} does not match J={J}"
            )
        if not np.all(np.isfinite(amplitudes)):
            raise ValueError("Amplitudes must be finite")
        amplitudes.setflags(write=False)
        object.__setattr__(self, 'amplitudes', amplitudes)

    @classmethod
    def basis(cls, state: Union[FockState, Sequence[int]]) -> 'FockVector':
        if not isinstance(state, FockState):
            state = FockState(tuple(state))
        amplitudes = np.zeros(2 ** state.J, dtype=complex)
        amplitudes[state.index] = 1.0
        return cls(amplitudes, state.J)

    @property
    def dim(self) -> int:
        return 2 ** self.J

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def inner(self, other: 'FockVector') -> complex:
        """<self|other>, antilinear in self."""
        if other.J != self.J:
            raise DimensionMismatchError(f"Vectors on J={self.J} and J={other.J}")
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def amplitude(self, state: Union[FockState, Sequence[int]]) -> complex:
        if not isinstance(state, FockState):
            state = FockState(tuple(state))
        return complex(self.amplitudes[state.index])


@lru_cache(maxsize=256)
def _annihilation_csr(j: int, J: int) -> sparse.csr_matrix:
    occupations = _occupation_table(J)
    indices = np.arange(2 ** J, dtype=np.int64)
    columns = indices[occupations[:, j] == 1]
    rows = columns ^ (1 << j)
    parity = occupations[columns, :j].sum(axis=1) % 2
    values = np.where(parity == 1, -1.0, 1.0)
    matrix = sparse.csr_matrix((values, (rows, columns)), shape=(2 ** J, 2 ** J), dtype=complex)
    logger.debug("Built a_%d for J=%d with %d entries", j, J, matrix.nnz)
    return matrix


def ladder_matrix(j: int, J: int, kind: str) -> Operator:
    """
    Sparse matrix of a_j (kind='annihilate') or a_j^+ (kind='create').

    Args:
        j: Level position in [0, J)
        J: Level count, at most MAX_LEVELS
        kind: 'create' or 'annihilate'

    Returns:
        Operator whose action on each basis state matches apply_create /
        apply_annihilate.

    Raises:
        LevelCapError: If J exceeds the cap
        LevelIndexError: If j is out of range
    """
    J = check_level_count(J)
    j = check_level(j, J)
    if kind not in LADDER_KINDS:
        raise ValueError(f"Unknown ladder kind: {kind}")
    annihilate = _annihilation_csr(j, J)
    if kind == ANNIHILATE:
        return Operator(annihilate.copy(), J)
    return Operator(annihilate.T.tocsr(), J)


def kronecker_ladder_matrix(j: int, J: int, kind: str) -> np.ndarray:
    """
    Dense ladder matrix from the tensor-product construction.

    Position k is the k-th least significant tensor factor; levels below j
    contribute Z, level j the local lowering (or raising) matrix, levels
    above j the identity. Independent of ladder_matrix on purpose.
    """
    J = check_level_count(J, DENSE_LEVEL_LIMIT)
    j = check_level(j, J)
    if kind not in LADDER_KINDS:
        raise ValueError(f"Unknown ladder kind: {kind}")
    lowering = np.array([[0, 1], [0, 0]], dtype=complex)
    local = lowering if kind == ANNIHILATE else lowering.T
    z = np.diag([1.0, -1.0]).astype(complex)
    eye = np.eye(2, dtype=complex)
    # np.kron puts its first argument on the most significant bit
    factors = []
    for k in reversed(range(J)):
        if k == j:
            factors.append(local)
        elif k < j:
            factors.append(z)
        else:
            factors.append(eye)
    return reduce(np.kron, factors)


def number_matrix(j: int, J: int) -> Operator:
    """a_j^+ a_j as a diagonal operator."""
    J = check_level_count(J)
    j = check_level(j, J)
    return Operator(sparse.diags(_occupation_table(J)[:, j].astype(complex), format='csr'), J)


def identity(J: int) -> Operator:
    J = check_level_count(J)
    return Operator(sparse.identity(2 ** J, dtype=complex, format='csr'), J)


def zero_operator(J: int) -> Operator:
    J = check_level_count(J)
    return Operator(sparse.csr_matrix((2 ** J, 2 ** J), dtype=complex), J)


def apply_operator(op: Operator, v: FockVector) -> FockVector:
    """Matrix-vector product op * v."""
    if op.J != v.J:
        raise DimensionMismatchError(f"Operator on J={op.J} applied to vector on J={v.J}")
    return FockVector(np.asarray(op.matrix @ v.amplitudes).reshape(-1), v.J)
