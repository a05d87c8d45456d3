"""Polynomials in product-of-roots form.

``f(z) = prod_l (z - z_l) ** N_l`` is represented by its distinct roots and
their multiplicities. Moduli are accumulated in log space; the raw product is
also available but overflows for large degree.
"""

from __future__ import annotations

import cmath
import hashlib
import json
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np


def _check_finite(z: complex) -> complex:
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValueError(f"non-finite complex point {z!r}")
    return z


@dataclass(frozen=True)
class RootEntry:
    location: complex
    multiplicity: int = 1

    def __post_init__(self):
        object.__setattr__(self, "location", _check_finite(self.location))
        if int(self.multiplicity) != self.multiplicity or self.multiplicity < 1:
            raise ValueError(f"multiplicity must be a positive integer, got {self.multiplicity!r}")
        object.__setattr__(self, "multiplicity", int(self.multiplicity))


@dataclass(frozen=True)
class Instance:
    """Distinct roots with multiplicities. Use :meth:`from_pairs` to build
    one from raw input where locations may coincide."""

    roots: Tuple[RootEntry, ...]

    def __post_init__(self):
        roots = tuple(self.roots)
        object.__setattr__(self, "roots", roots)
        if not roots:
            raise ValueError("an instance needs at least one root")
        locs = [r.location for r in roots]
        if len(set(locs)) != len(locs):
            raise ValueError("root locations must be pairwise distinct; use Instance.from_pairs to merge")

    @classmethod
    def from_pairs(cls, pairs: Iterable) -> "Instance":
        """Build from ``(location, multiplicity)`` pairs or bare locations,
        merging coincident locations by summing multiplicities."""
        merged: dict = {}
        for item in pairs:
            if isinstance(item, RootEntry):
                z, m = item.location, item.multiplicity
            elif isinstance(item, (tuple, list)):
                z, m = item
            else:
                z, m = item, 1
            z = _check_finite(z)
            RootEntry(z, m)  # validates multiplicity
            merged[z] = merged.get(z, 0) + int(m)
        return cls(tuple(RootEntry(z, m) for z, m in merged.items()))

    @property
    def degree(self) -> int:
        return sum(r.multiplicity for r in self.roots)

    def __len__(self) -> int:
        return len(self.roots)

    @cached_property
    def locations(self) -> np.ndarray:
        return np.array([r.location for r in self.roots], dtype=complex)

    @cached_property
    def multiplicities(self) -> np.ndarray:
        return np.array([r.multiplicity for r in self.roots], dtype=float)

    @cached_property
    def digest(self) -> str:
        """Short content hash, independent of root order."""
        canon = sorted((r.location.real, r.location.imag, r.multiplicity) for r in self.roots)
        blob = json.dumps(canon).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def concat(self, other: "Instance") -> "Instance":
        """Instance of the product ``f * g``."""
        return Instance.from_pairs(list(self.roots) + list(other.roots))

    def scale(self) -> float:
        """``max(1, max |z_l|) ** (degree - 1)``: magnitude scale for |f'|."""
        rmax = max(1.0, float(np.max(np.abs(self.locations))))
        return rmax ** (self.degree - 1)

    def spread(self) -> float:
        """Maximum pairwise distance between distinct roots (0 for one root)."""
        z = self.locations
        if len(z) < 2:
            return 0.0
        return float(np.max(np.abs(z[:, None] - z[None, :])))


@dataclass(frozen=True)
class EvalResult:
    value: complex
    log_modulus: float
    # None when z hits a root
    log_derivative: Optional[complex]


def evaluate(inst: Instance, z: complex) -> EvalResult:
    z = _check_finite(z)
    value = 1.0 + 0.0j
    log_mod = 0.0
    logd = 0.0 + 0.0j
    hit = False
    for r in inst.roots:
        d = z - r.location
        value *= d ** r.multiplicity
        if d == 0:
            hit = True
            continue
        log_mod += r.multiplicity * math.log(abs(d))
        logd += r.multiplicity / d
    if hit:
        return EvalResult(value, -math.inf, None)
    return EvalResult(value, log_mod, logd)


def derivative_value(inst: Instance, z: complex) -> complex:
    z = _check_finite(z)
    for i, r in enumerate(inst.roots):
        if z == r.location:
            if r.multiplicity >= 2:
                return 0j
            rest = 1.0 + 0.0j
            for j, o in enumerate(inst.roots):
                if j != i:
                    rest *= (z - o.location) ** o.multiplicity
            return rest
    ev = evaluate(inst, z)
    return ev.value * ev.log_derivative


def log_modulus(inst: Instance, z) -> np.ndarray:
    """Vectorised ``ln|f(z)|``; exact root hits give ``-inf``."""
    z = np.asarray(z, dtype=complex)
    out = np.zeros(z.shape, dtype=float)
    with np.errstate(divide="ignore"):
        for loc, m in zip(inst.locations, inst.multiplicities):
            out += m * np.log(np.abs(z - loc))
    return out


def log_derivative(inst: Instance, z) -> np.ndarray:
    """Vectorised ``f'(z)/f(z) = sum N_l / (z - z_l)``."""
    z = np.asarray(z, dtype=complex)
    out = np.zeros(z.shape, dtype=complex)
    with np.errstate(divide="ignore", invalid="ignore"):
        for loc, m in zip(inst.locations, inst.multiplicities):
            out += m / (z - loc)
    return out


def phase(inst: Instance, z) -> np.ndarray:
    """Unit-modulus ``f(z)/|f(z)|`` computed factor by factor (no overflow)."""
    z = np.asarray(z, dtype=complex)
    out = np.ones(z.shape, dtype=complex)
    with np.errstate(invalid="ignore", divide="ignore"):
        for loc, m in zip(inst.locations, inst.multiplicities):
            d = z - loc
            out *= (d / np.abs(d)) ** int(m)
    return out


def critical_values(inst: Instance, z) -> Tuple[np.ndarray, np.ndarray]:
    """Return ``(ln|f'(z)|, arg-phase of f'(z))`` for non-root points."""
    g = log_derivative(inst, z)
    with np.errstate(divide="ignore"):
        lm = log_modulus(inst, z) + np.log(np.abs(g))
    ph = phase(inst, z) * (g / np.abs(g))
    return lm, ph


def poly_coefficients(inst: Instance) -> np.ndarray:
    """Monomial coefficients of f, highest degree first (overflow-prone)."""
    return np.poly(np.repeat(inst.locations, inst.multiplicities.astype(int)))


def root_circle(center: complex, count: int, radius: float) -> Sequence[complex]:
    return [center + radius * cmath.exp(2j * math.pi * k / count) for k in range(count)]
