"""Seeded random circuits for acceptance runs and the batch command."""

from typing import Sequence

import numpy as np

from gates import DIAG, ONE_QUBIT_ARITY, Circuit, GateOp

DEFAULT_GATE_SET = ('x', 'z', 'h', 'phase', DIAG)


def random_circuit(n: int, depth: int, seed: int,
                   gate_set: Sequence[str] = DEFAULT_GATE_SET) -> Circuit:
    """
    Draw `depth` gates uniformly from gate_set with numpy's default_rng(seed).

    Angles are uniform in [0, 2*pi). Diagonal gates are skipped for n = 1.
    The same (n, depth, seed, gate_set) always yields the same circuit.
    """
    if depth < 0:
        raise ValueError(f"depth must be non-negative, got {depth}")
    for name in gate_set:
        if name != DIAG and name not in ONE_QUBIT_ARITY:
            raise ValueError(f"unknown gate '{name}'")
    names = [name for name in gate_set if n > 1 or name != DIAG]
    if not names:
        raise ValueError("gate set has no gate applicable to a single qubit")

    rng = np.random.default_rng(seed)
    gates = []
    for _ in range(depth):
        name = names[int(rng.integers(len(names)))]
        if name == DIAG:
            a, b = (int(q) for q in rng.choice(n, size=2, replace=False))
            gates.append(GateOp(DIAG, (a, b), tuple(rng.uniform(0, 2 * np.pi, size=4))))
        else:
            target = int(rng.integers(n))
            params = tuple(rng.uniform(0, 2 * np.pi, size=ONE_QUBIT_ARITY[name]))
            gates.append(GateOp(name, (target,), params))
    return Circuit(n=n, gates=tuple(gates))
