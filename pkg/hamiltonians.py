"""
Hermitian Fock-space operators from coefficient tables.

Term types:
    external field   alpha_i a_i^+ a_i
    diagonal         beta_ij a_i^+ a_i a_j^+ a_j        (once per unordered pair)
    tunneling        gamma_ij a_i^+ a_j + conj(gamma_ij) a_j^+ a_i   (i < j)
    one-body         H_kl a_k^+ a_l
    two-body         H_klmn a_l^+ a_k^+ a_m a_n
Tables are sparse maps keyed by level positions; absent keys are zero.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Mapping, Sequence, Tuple

import numpy as np
from scipy import sparse

from fock_core import (
    ANNIHILATE,
    CREATE,
    NonHermitianError,
    Operator,
    basis_occupations,
    check_level,
    check_level_count,
    identity,
    ladder_matrix,
    zero_operator,
)

logger = logging.getLogger(__name__)

ASSEMBLY_HERMITIAN_TOL = 1e-12

Pair = Tuple[int, int]


def _is_real(value: complex) -> bool:
    return float(np.imag(value)) == 0.0


def _pair_table(table: Mapping, J: int, name: str, conjugate_swap: bool) -> Dict[Pair, complex]:
    """
    Normalize a pair-keyed table to keys (i, j) with i < j.

    A reversed key is folded onto (j, i); for tunneling the value is
    conjugated, since gamma_ji a_j^+ a_i + h.c. equals conj(gamma_ji) a_i^+ a_j + h.c.
    Both orientations may be given only if they describe the same term.
    """
    normalized: Dict[Pair, complex] = {}
    for key, value in table.items():
        i, j = (check_level(k, J) for k in key)
        if i == j:
            raise ValueError(f"{name} entry ({i}, {j}) must couple two distinct levels")
        if i > j:
            i, j = j, i
            value = np.conj(value) if conjugate_swap else value
        if (i, j) in normalized:
            if not np.isclose(normalized[(i, j)], value, rtol=0, atol=1e-15):
                raise ValueError(f"{name} given twice for pair ({i}, {j}) with different values")
            continue
        normalized[(i, j)] = complex(value)
    return normalized


@dataclass
class HamiltonianSpec:
    """
    Coefficient tables defining a Hermitian Fock-space operator.

    ``offset`` adds offset * I, which only contributes a global phase to
    evolutions.
    """

    J: int
    alpha: Dict[int, float] = field(default_factory=dict)
    beta: Dict[Pair, float] = field(default_factory=dict)
    gamma: Dict[Pair, complex] = field(default_factory=dict)
    one_body: Dict[Pair, complex] = field(default_factory=dict)
    two_body: Dict[Tuple[int, int, int, int], complex] = field(default_factory=dict)
    offset: float = 0.0

    def __post_init__(self):
        self.J = check_level_count(self.J)
        if not isinstance(self.alpha, Mapping):
            self.alpha = {i: a for i, a in enumerate(self.alpha) if a != 0}
        self.validate()
        self.alpha = {int(i): float(np.real(a)) for i, a in self.alpha.items()}
        self.beta = {k: float(np.real(v)) for k, v in _pair_table(self.beta, self.J, 'beta', False).items()}
        self.gamma = _pair_table(self.gamma, self.J, 'gamma', True)
        self.one_body = {(int(k), int(l)): complex(v) for (k, l), v in self.one_body.items()}
        self.two_body = {tuple(int(i) for i in key): complex(v) for key, v in self.two_body.items()}
        self.offset = float(self.offset)

    def validate(self):
        """
        Check ranges and reality conditions.

        Raises:
            ValueError: Complex alpha/beta, diagonal beta or gamma entries,
                or indices out of range
            NonHermitianError: If the one-body table is not Hermitian
        """
        for i, a in self.alpha.items():
            check_level(i, self.J)
            if not _is_real(a):
                raise ValueError(f"alpha[{i}] must be real, got {a}")
        for key, b in self.beta.items():
            if not _is_real(b):
                raise ValueError(f"beta{tuple(key)} must be real, got {b}")
        for key in self.one_body:
            for k in key:
                check_level(k, self.J)
        for key in self.two_body:
            if len(key) != 4:
                raise ValueError(f"two_body keys need four indices, got {key}")
            for k in key:
                check_level(k, self.J)
        for (k, l), value in self.one_body.items():
            partner = self.one_body.get((l, k), 0.0)
            if abs(complex(value) - np.conj(partner)) > ASSEMBLY_HERMITIAN_TOL:
                raise NonHermitianError(f"one_body[{k},{l}] has no Hermitian partner")
        if not np.isfinite(float(np.real(self.offset))):
            raise ValueError("offset must be finite")

    def alpha_array(self) -> np.ndarray:
        values = np.zeros(self.J)
        for i, a in self.alpha.items():
            values[i] = a
        return values

    def is_empty(self) -> bool:
        return not any((self.alpha, self.beta, self.gamma, self.one_body,
                        self.two_body)) and self.offset == 0.0

    def has_coefficients(self) -> bool:
        """True when any table carries an entry (offset excluded)."""
        return any((self.alpha, self.beta, self.gamma, self.one_body, self.two_body))

    def merge(self, other: 'HamiltonianSpec') -> 'HamiltonianSpec':
        """Coefficient-wise sum of two specs on the same levels."""
        if other.J != self.J:
            raise ValueError(f"Cannot merge specs on J={self.J} and J={other.J}")

        def add(a: Mapping, b: Mapping) -> dict:
            merged = dict(a)
            for key, value in b.items():
                merged[key] = merged.get(key, 0) + value
            return merged

        return HamiltonianSpec(
            J=self.J,
            alpha=add(self.alpha, other.alpha),
            beta=add(self.beta, other.beta),
            gamma=add(self.gamma, other.gamma),
            one_body=add(self.one_body, other.one_body),
            two_body=add(self.two_body, other.two_body),
            offset=self.offset + other.offset,
        )

    def to_dict(self) -> Dict:
        """JSON-ready representation (see README for the schema)."""

        def entries(table: Mapping) -> list:
            return [
                {'indices': list(key), 're': float(np.real(v)), 'im': float(np.imag(v))}
                for key, v in sorted(table.items())
            ]

        return {
            'J': self.J,
            'alpha': [float(a) for a in self.alpha_array()],
            'beta': entries(self.beta),
            'gamma': entries(self.gamma),
            'one_body': entries(self.one_body),
            'two_body': entries(self.two_body),
            'offset': self.offset,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> 'HamiltonianSpec':
        def table(name: str, real: bool = False) -> dict:
            result = {}
            for entry in data.get(name, []):
                value = complex(entry.get('re', 0.0), entry.get('im', 0.0))
                if real and value.imag != 0.0:
                    raise ValueError(f"{name} entries must be real")
                result[tuple(int(i) for i in entry['indices'])] = value.real if real else value
            return result

        J = int(data['J'])
        alpha = {i: float(a) for i, a in enumerate(data.get('alpha', [])) if a != 0.0}
        if len(data.get('alpha', [])) not in (0, J):
            raise ValueError(f"alpha must have length J={J}")
        return cls(
            J=J,
            alpha=alpha,
            beta=table('beta', real=True),
            gamma=table('gamma'),
            one_body=table('one_body'),
            two_body=table('two_body'),
            offset=float(data.get('offset', 0.0)),
        )


def hermiticity_residual(op: Operator) -> float:
    """Frobenius norm of H - H^+."""
    return op.hermiticity_residual()


def build_external(alpha: Sequence[float], J: int) -> Operator:
    """
    External-field term: diagonal with eigenvalue sum_i alpha_i n_i.

    Raises:
        ValueError: If len(alpha) != J or alpha is complex
    """
    J = check_level_count(J)
    alpha = np.asarray(alpha)
    if alpha.shape != (J,):
        raise ValueError(f"alpha has length {alpha.size}, expected J={J}")
    if np.iscomplexobj(alpha) and np.any(np.imag(alpha) != 0):
        raise ValueError("alpha must be real")
    diagonal = basis_occupations(J) @ np.real(alpha).astype(float)
    return Operator(sparse.diags(diagonal.astype(complex), format='csr'), J)


def build_diagonal(beta: Mapping[Pair, float], J: int) -> Operator:
    """Diagonal interaction: eigenvalue sum over unordered pairs of beta_ij n_i n_j."""
    J = check_level_count(J)
    for key, value in beta.items():
        if not _is_real(value):
            raise ValueError(f"beta{tuple(key)} must be real, got {value}")
    table = _pair_table(beta, J, 'beta', conjugate_swap=False)
    occupations = basis_occupations(J)
    diagonal = np.zeros(2 ** J)
    for (i, j), value in table.items():
        diagonal += value.real * occupations[:, i] * occupations[:, j]
    return Operator(sparse.diags(diagonal.astype(complex), format='csr'), J)


def build_tunneling(gamma: Mapping[Pair, complex], J: int) -> Operator:
    """Tunneling: gamma_ij a_i^+ a_j + conj(gamma_ij) a_j^+ a_i with Jordan-Wigner signs."""
    J = check_level_count(J)
    table = _pair_table(gamma, J, 'gamma', conjugate_swap=True)
    total = zero_operator(J)
    for (i, j), value in table.items():
        hop = ladder_matrix(i, J, CREATE) @ ladder_matrix(j, J, ANNIHILATE)
        total = total + value * hop + np.conj(value) * hop.adjoint()
    return total


def build_one_body(table: Mapping[Pair, complex], J: int) -> Operator:
    """
    One-body expansion sum_{k,l} H_kl a_k^+ a_l.

    Hermiticity of the result is measured and logged, not assumed.
    """
    J = check_level_count(J)
    total = zero_operator(J)
    for (k, l), value in table.items():
        check_level(k, J)
        check_level(l, J)
        total = total + complex(value) * (ladder_matrix(k, J, CREATE) @ ladder_matrix(l, J, ANNIHILATE))
    residual = hermiticity_residual(total)
    if residual > ASSEMBLY_HERMITIAN_TOL:
        logger.warning("One-body operator is not Hermitian (residual %.3e)", residual)
    return total


def build_two_body(table: Mapping[Tuple[int, int, int, int], complex], J: int) -> Operator:
    """
    Two-body expansion sum H_klmn a_l^+ a_k^+ a_m a_n.

    The operator order is exactly a_l^+ a_k^+ a_m a_n; reordering would flip signs.
    """
    J = check_level_count(J)
    total = zero_operator(J)
    for key, value in table.items():
        k, l, m, n = (check_level(i, J) for i in key)
        term = (ladder_matrix(l, J, CREATE) @ ladder_matrix(k, J, CREATE)
                @ ladder_matrix(m, J, ANNIHILATE) @ ladder_matrix(n, J, ANNIHILATE))
        total = total + complex(value) * term
    residual = hermiticity_residual(total)
    if residual > ASSEMBLY_HERMITIAN_TOL:
        logger.warning("Two-body operator is not Hermitian (residual %.3e)", residual)
    return total


def particle_number(J: int) -> Operator:
    """Total number operator sum_k a_k^+ a_k."""
    return build_external(np.ones(check_level_count(J)), J)


def assemble(spec: HamiltonianSpec) -> Operator:
    """
    Sum of all term builders for a spec, plus offset * I.

    Raises:
        NonHermitianError: If the assembled operator is not Hermitian
    """
    J = spec.J
    total = build_external(spec.alpha_array(), J)
    if spec.beta:
        total = total + build_diagonal(spec.beta, J)
    if spec.gamma:
        total = total + build_tunneling(spec.gamma, J)
    if spec.one_body:
        total = total + build_one_body(spec.one_body, J)
    if spec.two_body:
        total = total + build_two_body(spec.two_body, J)
    if spec.offset:
        total = total + spec.offset * identity(J)

    scale = max([1.0] + [abs(v) for table in (spec.alpha, spec.beta, spec.gamma,
                                              spec.one_body, spec.two_body)
                         for v in table.values()])
    residual = hermiticity_residual(total)
    if residual > ASSEMBLY_HERMITIAN_TOL * scale:
        raise NonHermitianError(f"Assembled Hamiltonian is not Hermitian (residual {residual:.3e})")
    return total
