"""Random instances: moduli uniform on [0, 1), arguments uniform on [0, 2*pi).

The stream is SplitMix64, pinned so every implementation reproduces the same
instances bit for bit:

    state = (state + 0x9E3779B97F4A7C15) mod 2**64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) mod 2**64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) mod 2**64
    out = z ^ (z >> 31)

A uniform double on [0, 1) is ``(out >> 11) * 2**-53``. ``generate`` draws
all ``n`` moduli first, then all ``n`` arguments, then (only when weights are
given) one multiplicity draw per root, in that order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

from .core import Instance

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15


def _mix(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


class SplitMix64:
    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + GAMMA) & MASK64
        return _mix(self.state)

    def uniform(self) -> float:
        return (self.next_u64() >> 11) * 2.0**-53


def stream_output(seed: int, index: int) -> int:
    """The ``index``-th (0-based) output of ``SplitMix64(seed)`` in O(1)."""
    return _mix((seed + (index + 1) * GAMMA) & MASK64)


@dataclass(frozen=True)
class GenSpec:
    n_zeros: int
    seed: int = 0
    # weights for multiplicities (1, 2, 3); None means all simple
    multiplicity_weights: Optional[Tuple[float, float, float]] = None

    def __post_init__(self):
        if int(self.n_zeros) != self.n_zeros or self.n_zeros < 1:
            raise ValueError(f"n_zeros must be a positive integer, got {self.n_zeros!r}")
        w = self.multiplicity_weights
        if w is not None:
            if len(w) != 3 or any(x < 0 for x in w) or sum(w) <= 0:
                raise ValueError("multiplicity_weights must be three non-negative numbers with positive sum")


def draw_roots(spec: GenSpec):
    """Raw ``(location, multiplicity)`` draws before coincident-root merging."""
    rng = SplitMix64(spec.seed)
    n = spec.n_zeros
    moduli = [rng.uniform() for _ in range(n)]
    args = [2 * math.pi * rng.uniform() for _ in range(n)]
    mults = [1] * n
    if spec.multiplicity_weights is not None:
        total = float(sum(spec.multiplicity_weights))
        cum = []
        acc = 0.0
        for w in spec.multiplicity_weights:
            acc += w / total
            cum.append(acc)
        for i in range(n):
            u = rng.uniform()
            mults[i] = next((k + 1 for k, c in enumerate(cum) if u < c), 3)
    return [(complex(r * math.cos(t), r * math.sin(t)), m) for r, t, m in zip(moduli, args, mults)]


def generate(spec: GenSpec) -> Instance:
    return Instance.from_pairs(draw_roots(spec))
