"""Zeros of f' and the ladder of critical log-moduli.

A root of multiplicity N contributes a critical point of multiplicity N-1 at
the same place. The remaining zeros of f' are the zeros of the numerator of
``f'/f = sum N_l / (z - z_l)``, a polynomial of degree k-1 for k distinct
roots, found by Aberth-Ehrlich simultaneous iteration and polished by Newton
on f'.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from .core import Instance, log_derivative, log_modulus
from .errors import DegenerateLadder, SolverNoConvergence

MAX_ITER = 500
TIE_TOL = 1e-12
RESIDUAL_RTOL = 1e-9
BRACKET_FLOOR = 1e-6


@dataclass(frozen=True)
class CriticalPoint:
    location: complex
    multiplicity: int
    log_critical_modulus: float  # -inf on a multiple root of f
    residual: float  # |f'| at location

    @property
    def finite(self) -> bool:
        return math.isfinite(self.log_critical_modulus)


@dataclass(frozen=True)
class Rung:
    """One distinct finite critical modulus and the points sitting on it."""

    level: float
    indices: Tuple[int, ...]
    multiplicity: int
    delta: float = 0.0

    @property
    def degenerate(self) -> bool:
        return len(self.indices) > 1

    @property
    def bracket(self) -> Tuple[float, float]:
        return (self.level - self.delta, self.level + self.delta)


@dataclass(frozen=True)
class CriticalLadder:
    points: Tuple[CriticalPoint, ...]
    degree: int

    @property
    def total_multiplicity(self) -> int:
        return sum(p.multiplicity for p in self.points)

    @property
    def finite_levels(self) -> List[float]:
        return [p.log_critical_modulus for p in self.points if p.finite]

    def rungs(self) -> List[Rung]:
        """Group finite critical points whose moduli agree within ``TIE_TOL``."""
        out: List[Rung] = []
        for i, p in enumerate(self.points):
            if not p.finite:
                continue
            if out and p.log_critical_modulus - out[-1].level <= TIE_TOL:
                last = out[-1]
                out[-1] = Rung(last.level, last.indices + (i,), last.multiplicity + p.multiplicity)
            else:
                out.append(Rung(p.log_critical_modulus, (i,), p.multiplicity))
        return out

    @property
    def degenerate(self) -> bool:
        return any(r.degenerate for r in self.rungs())


def _horner(coeffs: np.ndarray, z: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    p = np.full(z.shape, coeffs[0], dtype=complex)
    dp = np.zeros(z.shape, dtype=complex)
    for c in coeffs[1:]:
        dp = dp * z + p
        p = p * z + c
    return p, dp


def numerator_coefficients(inst: Instance) -> np.ndarray:
    """Coefficients (highest first) of ``sum_l N_l prod_{j != l} (z - z_j)``."""
    locs = inst.locations
    k = len(locs)
    coeffs = np.zeros(k, dtype=complex)
    for l in range(k):
        others = np.delete(locs, l)
        coeffs += inst.multiplicities[l] * np.poly(others)
    return coeffs


def aberth(coeffs: np.ndarray, start: np.ndarray, max_iter: int = MAX_ITER) -> Tuple[np.ndarray, int]:
    """Aberth-Ehrlich iteration for all roots of a polynomial at once.

    Returns the approximations and the number of sweeps performed.
    """
    z = start.astype(complex).copy()
    n = len(z)
    for it in range(1, max_iter + 1):
        p, dp = _horner(coeffs, z)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = p / dp
            diff = z[:, None] - z[None, :]
            np.fill_diagonal(diff, 1.0)
            inv = 1.0 / diff
            np.fill_diagonal(inv, 0.0)
            w = ratio / (1.0 - ratio * inv.sum(axis=1))
        w = np.where(np.isfinite(w), w, 0.0)
        z = z - w
        if np.all(np.abs(w) <= 4 * np.finfo(float).eps * np.maximum(1.0, np.abs(z))):
            return z, it
    return z, max_iter


def _newton_polish(inst: Instance, z: complex, steps: int = 20) -> complex:
    """Newton on f' written through g = f'/f: step = g / (g**2 + g')."""
    locs, mults = inst.locations, inst.multiplicities

    def resid(w):
        d = w - locs
        if np.any(d == 0):
            return math.inf
        g = np.sum(mults / d)
        return abs(g) * math.exp(float(np.sum(mults * np.log(np.abs(d)))))

    best, best_r = z, resid(z)
    for _ in range(steps):
        d = best - locs
        g = np.sum(mults / d)
        dg = -np.sum(mults / d**2)
        denom = g * g + dg
        if denom == 0:
            break
        cand = best - g / denom
        r = resid(cand)
        if not r < best_r:
            break
        best, best_r = cand, r
    return complex(best)


def _merge_close(inst: Instance, zs: Sequence[complex]) -> List[Tuple[complex, int]]:
    """Merge approximations of a repeated numerator root into one point."""
    locs = inst.locations
    groups: List[List[complex]] = []
    for z in zs:
        local = float(np.min(np.abs(z - locs)))
        for g in groups:
            if abs(g[0] - z) <= 1e-6 * local:
                g.append(z)
                break
        else:
            groups.append([z])
    return [(complex(np.mean(g)), len(g)) for g in groups]


def _start_points(inst: Instance, n: int) -> np.ndarray:
    rmax = float(np.max(np.abs(inst.locations)))
    radius = 1.1 * rmax if rmax > 0 else 1.0
    # phase offset fixed by the instance digest: reproducible runs
    offset = (int(inst.digest[:8], 16) / 2**32) * 2 * math.pi / n
    k = np.arange(n)
    return radius * np.exp(1j * (offset + 2 * math.pi * k / n + 0.5 / n))


def residual_tolerance(inst: Instance) -> float:
    return RESIDUAL_RTOL * inst.scale()


def critical_points(inst: Instance) -> CriticalLadder:
    pts: List[CriticalPoint] = []
    for r in inst.roots:
        if r.multiplicity >= 2:
            pts.append(CriticalPoint(r.location, r.multiplicity - 1, -math.inf, 0.0))

    k = len(inst.roots)
    if k >= 2:
        coeffs = numerator_coefficients(inst)
        if k == 2:
            approx = np.array([-coeffs[1] / coeffs[0]])
        else:
            approx, _ = aberth(coeffs, _start_points(inst, k - 1))
        polished = [_newton_polish(inst, complex(z)) for z in approx]
        tol = residual_tolerance(inst)
        worst = 0.0
        for z, m in _merge_close(inst, polished):
            lm = float(log_modulus(inst, z))
            g = complex(log_derivative(inst, z))
            res = abs(g) * math.exp(lm) if math.isfinite(lm) else math.inf
            if not math.isfinite(lm) or not math.isfinite(res):
                worst = math.inf
                continue
            worst = max(worst, res)
            pts.append(CriticalPoint(z, m, lm, res))
        if worst > tol:
            raise SolverNoConvergence(worst, tol)

    pts.sort(key=lambda p: (p.log_critical_modulus, p.location.real, p.location.imag))
    return CriticalLadder(tuple(pts), inst.degree)


def bracket_rungs(ladder: CriticalLadder, rel_gap: float = 0.01) -> List[Rung]:
    """Rungs with their bracket half-widths, ties included (no error)."""
    if not 0 < rel_gap < 0.5:
        raise ValueError(f"rel_gap must lie in (0, 0.5), got {rel_gap}")
    rungs = ladder.rungs()
    levels = [r.level for r in rungs]
    out = []
    for i, r in enumerate(rungs):
        gaps = [1.0]
        if i > 0:
            gaps.append(levels[i] - levels[i - 1])
        if i + 1 < len(levels):
            gaps.append(levels[i + 1] - levels[i])
        s = min(gaps)
        delta = max(rel_gap * s, min(BRACKET_FLOOR, 0.49 * s))
        out.append(Rung(r.level, r.indices, r.multiplicity, delta))
    return out


def merge_brackets(ladder: CriticalLadder, rel_gap: float) -> List[Tuple[float, float]]:
    """``(c - delta, c + delta)`` around every distinct finite critical modulus.

    ``delta`` is ``rel_gap`` times the smaller gap to the neighbouring rungs
    (a lone rung counts gaps as 1.0), floored at 1e-6.
    """
    rungs = bracket_rungs(ladder, rel_gap)
    ties = [r.indices for r in rungs if r.degenerate]
    if ties:
        raise DegenerateLadder(ties)
    return [r.bracket for r in rungs]


def convex_hull(points: Sequence[complex]) -> List[complex]:
    """Andrew's monotone chain; counter-clockwise, collinear points dropped."""
    pts = sorted(set((p.real, p.imag) for p in points))
    if len(pts) <= 2:
        return [complex(*p) for p in pts]

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower: list = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list = []
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return [complex(*p) for p in lower[:-1] + upper[:-1]]


def _segment_distance(p: complex, a: complex, b: complex) -> float:
    ab = b - a
    if ab == 0:
        return abs(p - a)
    t = ((p - a) * ab.conjugate()).real / abs(ab) ** 2
    t = min(1.0, max(0.0, t))
    return abs(p - (a + t * ab))


def in_convex_hull(p: complex, points: Sequence[complex], margin: float = 1e-9) -> bool:
    """Gauss-Lucas style membership: inside the hull or within ``margin`` of it."""
    hull = convex_hull(points)
    if len(hull) == 1:
        return abs(p - hull[0]) <= margin
    if len(hull) == 2:
        return _segment_distance(p, hull[0], hull[1]) <= margin
    n = len(hull)
    inside = True
    for i in range(n):
        a, b = hull[i], hull[(i + 1) % n]
        if ((b - a).conjugate() * (p - a)).imag < 0:
            inside = False
            break
    if inside:
        return True
    return min(_segment_distance(p, hull[i], hull[(i + 1) % n]) for i in range(n)) <= margin
