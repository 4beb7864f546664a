"""Bit-string sampling by sequential one-qubit conditioning.

For each shot the measured qubits are visited in ascending order.  The
one-qubit reduced density matrix of the next qubit, conditioned on the bits
already drawn, gives ``P(0)`` and ``P(1)``; a uniform variate picks the bit.

Random numbers come from numpy's PCG64 bit generator seeded with the user
seed: the block ``Generator(PCG64(seed)).random((shots, m))`` is drawn once and
row ``i`` is shot ``i``'s stream, so the sample sequence depends only on
``(circuit, shots, seed, backend)``.  Conditional probabilities are memoised
by prefix, which keeps the cost proportional to the number of distinct
prefixes rather than the number of shots.
"""

from __future__ import annotations

from collections import Counter
from typing import Callable, Sequence

import numpy as np

from .errors import SamplingError

MIN_BRANCH_PROBABILITY = 1e-12

Conditional = Callable[[int, dict], tuple[float, float]]


def uniforms(shots: int, width: int, seed: int) -> np.ndarray:
    """The ``(shots, width)`` block of uniforms in ``[0, 1)`` used for sampling."""
    return np.random.Generator(np.random.PCG64(seed)).random((shots, width))


def draw(conditional: Conditional, qubits: Sequence[int], shots: int, seed: int) -> list[str]:
    """Sample ``shots`` bit-strings over ``qubits`` (kept in ascending order).

    ``conditional(q, projections)`` returns the unnormalised probabilities of
    qubit ``q`` reading 0 and 1 jointly with ``projections``.
    """
    if shots < 1:
        raise ValueError("shots must be at least 1")
    qubits = sorted(qubits)
    u = uniforms(shots, len(qubits), seed)
    p_zero: dict[tuple[int, ...], float] = {}
    out = []
    for row in u:
        prefix: tuple[int, ...] = ()
        for k, q in enumerate(qubits):
            p0 = p_zero.get(prefix)
            if p0 is None:
                a, b = conditional(q, dict(zip(qubits, prefix)))
                a, b = max(a, 0.0), max(b, 0.0)
                total = a + b
                if total < MIN_BRANCH_PROBABILITY:
                    raise SamplingError(
                        f"conditioning branch {prefix} on qubit {q} has probability {total:.3e}"
                    )
                p0 = a / total
                p_zero[prefix] = p0
            prefix += (0 if row[k] < p0 else 1,)
        out.append("".join(map(str, prefix)))
    return out


def histogram(samples: Sequence[str]) -> dict[str, int]:
    """Counts keyed by bit-string, in sorted key order."""
    return dict(sorted(Counter(samples).items()))


def sample(c, shots: int, seed: int = 0, backend: str = "exact", **config) -> list[str]:
    """Convenience wrapper: build a simulator for ``backend`` and sample from it."""
    from .simulator import Simulator, SimulatorConfig

    sim = Simulator(c, SimulatorConfig(backend=backend, seed=seed, **config))
    return sim.sample(shots, seed)


__all__ = ["draw", "histogram", "sample", "uniforms", "MIN_BRANCH_PROBABILITY"]
