"""Exact unitary evolution U = exp(-iHt) with time and hbar absorbed into the scale."""

import logging
import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np
import scipy.linalg
from scipy import sparse

from config.settings import HERMITIAN_TOL
from fock_core import (
    DimensionMismatchError,
    FockVector,
    NonHermitianError,
    Operator,
    apply_operator,
)
from hamiltonians import HamiltonianSpec, assemble

logger = logging.getLogger(__name__)


class NegativeDurationError(ValueError):
    """Durations are physical times and cannot run backwards."""


def _check_duration(t: float) -> float:
    t = float(t)
    if not math.isfinite(t):
        raise ValueError(f"Duration must be finite, got {t}")
    if t < 0:
        raise NegativeDurationError(
            f"Negative duration {t}; express inverse evolutions through the Hamiltonian sign"
        )
    return t


@dataclass(frozen=True)
class EvolutionSegment:
    """Evolution under a fixed Hamiltonian for a given duration."""

    hamiltonian: HamiltonianSpec
    duration: float

    def __post_init__(self):
        object.__setattr__(self, 'duration', _check_duration(self.duration))


def _is_diagonal(matrix) -> bool:
    if sparse.issparse(matrix):
        coo = matrix.tocoo()
        return bool(np.all(coo.row == coo.col))
    return bool(np.count_nonzero(matrix - np.diag(np.diagonal(matrix))) == 0)


def unitary(H: Operator, t: float) -> Operator:
    """
    exp(-iHt) through the Hermitian eigendecomposition H = V diag(w) V^+.

    Diagonal Hamiltonians are their own eigendecomposition and skip eigh.

    Args:
        H: Hermitian operator
        t: Non-negative duration

    Returns:
        Dense unitary Operator

    Raises:
        NonHermitianError: If ||H - H^+|| exceeds the Hermitian tolerance
        NegativeDurationError: If t < 0
    """
    t = _check_duration(t)
    residual = H.hermiticity_residual()
    if residual > HERMITIAN_TOL:
        raise NonHermitianError(f"Cannot exponentiate a non-Hermitian operator (residual {residual:.3e})")

    if _is_diagonal(H.matrix):
        diagonal = np.real(H.matrix.diagonal())
        return Operator(sparse.diags(np.exp(-1j * diagonal * t), format='csr'), H.J)

    matrix = H.dense()
    matrix = 0.5 * (matrix + matrix.conj().T)
    eigenvalues, eigenvectors = scipy.linalg.eigh(matrix)
    phases = np.exp(-1j * eigenvalues * t)
    U = (eigenvectors * phases) @ eigenvectors.conj().T
    return Operator(U, H.J)


def segment_unitary(segment: EvolutionSegment) -> Operator:
    return unitary(assemble(segment.hamiltonian), segment.duration)


def evolve(v: FockVector, segments: Iterable[EvolutionSegment]) -> FockVector:
    """
    Apply the segment unitaries to v in list order.

    Raises:
        DimensionMismatchError: If a segment acts on a different level count
    """
    for position, segment in enumerate(segments):
        if segment.hamiltonian.J != v.J:
            raise DimensionMismatchError(
                f"Segment {position} acts on J={segment.hamiltonian.J}, vector on J={v.J}"
            )
        norm_before = v.norm()
        v = apply_operator(segment_unitary(segment), v)
        drift = abs(v.norm() - norm_before)
        if drift > 1e-10 * max(1.0, norm_before):
            logger.warning("Segment %d changed the norm by %.3e", position, drift)
        else:
            logger.debug("Segment %d (t=%g) applied", position, segment.duration)
    return v


def expectation(op: Operator, v: FockVector) -> float:
    """Real part of <v|op|v>; exact energy for Hermitian op."""
    return float(np.real(v.inner(apply_operator(op, v))))
