"""Equimodular curves and sublevel components of ``ln|f|``.

The field is sampled on a rectilinear grid: a uniform base lattice plus graded
patches around features that would otherwise fall below grid resolution
(small lobes around roots at low levels, thin necks around saddles near their
critical modulus). Marching squares on that grid gives the contours; flood
fill of the sublevel nodes gives connectivity. Both use the same resolution of
ambiguous (saddle) cells, so every contour bounds exactly one labelled
component.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import ndimage
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .core import Instance, log_modulus
from .critical import CriticalLadder
from .errors import LevelTooCritical, OpenContour, OrphanRoot, SaddleAtLevel, WindowOverflow

CRITICAL_BAND = 1e-9
VERTEX_TOL = 1e-10
MAX_BISECT = 60
EDGE_EPS = 1e-12
NUDGE = 1e-9
DEFAULT_GRID = 512


@dataclass(frozen=True)
class Window:
    x_min: float
    x_max: float
    y_min: float
    y_max: float
    nx: int = DEFAULT_GRID
    ny: int = DEFAULT_GRID

    def __post_init__(self):
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ValueError("window must satisfy x_min < x_max and y_min < y_max")
        if self.nx < 16 or self.ny < 16:
            raise ValueError("grid resolution must be at least 16 in each direction")

    @property
    def cell(self) -> float:
        return max((self.x_max - self.x_min) / (self.nx - 1), (self.y_max - self.y_min) / (self.ny - 1))

    def with_resolution(self, nx: int, ny: Optional[int] = None) -> "Window":
        return Window(self.x_min, self.x_max, self.y_min, self.y_max, nx, nx if ny is None else ny)

    def boundary(self, per_edge: int) -> np.ndarray:
        t = np.linspace(0.0, 1.0, per_edge)
        x0, x1, y0, y1 = self.x_min, self.x_max, self.y_min, self.y_max
        return np.concatenate([
            x0 + (x1 - x0) * t + 1j * y0,
            x1 + 1j * (y0 + (y1 - y0) * t),
            x1 - (x1 - x0) * t + 1j * y1,
            x0 + 1j * (y1 - (y1 - y0) * t),
        ])


@dataclass(frozen=True, eq=False)
class ContourPolyline:
    vertices: np.ndarray  # complex; closed polylines do not repeat the first vertex
    closed: bool
    level: float
    component: int = -1  # label of the sublevel component it bounds

    def __len__(self) -> int:
        return len(self.vertices)

    def area(self) -> float:
        z = self.vertices
        return 0.5 * abs(float(np.sum((z * np.roll(z, -1).conj()).imag)))


@dataclass(frozen=True)
class Component:
    outer_contour: int
    roots: Tuple[int, ...]
    critical: Tuple[int, ...]
    root_multiplicity: int
    critical_multiplicity: int


@dataclass(frozen=True, eq=False)
class LevelTopology:
    level: float
    contours: List[ContourPolyline]
    components: List[Component]
    unassigned_critical: Tuple[int, ...] = ()
    open_components: int = 0


@dataclass(frozen=True, eq=False)
class Grid:
    """Sampled ``ln|f|``; ``values[i, j]`` is at ``xs[j] + 1j * ys[i]``."""

    window: Window
    xs: np.ndarray
    ys: np.ndarray
    values: np.ndarray
    crit_locations: np.ndarray = field(default_factory=lambda: np.zeros(0, complex))
    crit_levels: np.ndarray = field(default_factory=lambda: np.zeros(0))


def auto_window(inst: Instance, level: float, margin: float = 0.5, nx: int = DEFAULT_GRID,
                ny: Optional[int] = None) -> Window:
    """Square window around the roots on whose edge ``ln|f| > level``.

    Every point at distance at least ``r = exp(level/degree) + spread`` from
    the root bounding box has ``|f| >= r**degree > exp(level)``.
    """
    if margin < 0:
        raise ValueError("margin must be non-negative")
    ny = nx if ny is None else ny
    z = inst.locations
    cx = 0.5 * (z.real.min() + z.real.max())
    cy = 0.5 * (z.imag.min() + z.imag.max())
    half_box = 0.5 * max(np.ptp(z.real), np.ptp(z.imag))
    r = math.exp(level / inst.degree) + inst.spread()
    for _ in range(4):
        half = half_box + r + margin
        win = Window(cx - half, cx + half, cy - half, cy + half, nx, ny)
        edge = log_modulus(inst, win.boundary(4 * max(nx, ny)))
        if np.all(edge > level):
            return win
        margin = 2 * margin if margin > 0 else 0.1 * r
    raise WindowOverflow(f"window boundary not above level {level:.6g} after 3 margin doublings")


def _patch(center: float, spacing: float, extent: float, coarse: float) -> np.ndarray:
    """Offsets: uniform at ``spacing`` out to ``extent``, then grading up to ``coarse``."""
    n = int(math.ceil(extent / spacing))
    t = list(spacing * np.arange(n + 1))
    s, pos = spacing, t[-1]
    while s < coarse:
        s *= 1.5
        pos += s
        t.append(pos)
    t = np.asarray(t)
    return np.concatenate([center - t[:0:-1], center + t])


def refinement_patches(inst: Instance, ladder: Optional[CriticalLadder], levels: Sequence[float],
                       h: float) -> List[Tuple[complex, float, float]]:
    """``(center, spacing, extent)`` for features smaller than a few cells."""
    if not levels:
        return []
    out = []
    locs, mults = inst.locations, inst.multiplicities
    lmin = min(levels)
    for l, (z, m) in enumerate(zip(locs, mults)):
        others = np.delete(np.arange(len(locs)), l)
        d = np.abs(z - locs[others])
        near = float(d.min()) if len(d) else math.inf
        with np.errstate(divide="ignore"):
            rho = math.exp((lmin - float(np.sum(mults[others] * np.log(d)))) / m)
        size = min(rho, 0.5 * near)
        if size < 8 * h:
            out.append((complex(z), size / 6, 2 * size))
    if ladder is not None:
        for p in ladder.points:
            if not p.finite:
                continue
            k = p.multiplicity + 1
            coeff = float(np.sum(mults / (k * np.abs(p.location - locs) ** k)))
            gap = min(abs(L - p.log_critical_modulus) for L in levels)
            w = (max(gap, 1e-14) / coeff) ** (1.0 / k)
            if w < 8 * h:
                out.append((p.location, w / 4, 2 * w))
    return out


def _axis(lo: float, hi: float, n: int, centers, spacings, extents, coarse: float) -> np.ndarray:
    parts = [np.linspace(lo, hi, n)]
    for c, s, e in zip(centers, spacings, extents):
        parts.append(_patch(c, s, e, coarse))
    ax = np.unique(np.concatenate(parts))
    ax = ax[(ax >= lo) & (ax <= hi)]
    keep = np.concatenate([[True], np.diff(ax) > 1e-13 * max(1.0, abs(lo), abs(hi))])
    return ax[keep]


def sample_grid(inst: Instance, window: Window, levels: Sequence[float] = (),
                ladder: Optional[CriticalLadder] = None) -> Grid:
    """Sample ``ln|f|`` with feature patches sized for the given levels."""
    patches = refinement_patches(inst, ladder, list(levels), window.cell)
    cs = [p[0] for p in patches]
    ss = [p[1] for p in patches]
    es = [p[2] for p in patches]
    hx = (window.x_max - window.x_min) / (window.nx - 1)
    hy = (window.y_max - window.y_min) / (window.ny - 1)
    xs = _axis(window.x_min, window.x_max, window.nx, [c.real for c in cs], ss, es, hx)
    ys = _axis(window.y_min, window.y_max, window.ny, [c.imag for c in cs], ss, es, hy)
    values = np.zeros((len(ys), len(xs)))
    with np.errstate(divide="ignore"):
        for z, m in zip(inst.locations, inst.multiplicities):
            values += m * np.log(np.hypot(xs[None, :] - z.real, ys[:, None] - z.imag))
    if ladder is not None:
        fin = [p for p in ladder.points if p.finite]
        cl = np.array([p.location for p in fin], dtype=complex)
        cv = np.array([p.log_critical_modulus for p in fin], dtype=float)
    else:
        cl, cv = np.zeros(0, complex), np.zeros(0)
    return Grid(window, xs, ys, values, cl, cv)


def _near_critical(level: float, ladder: Optional[CriticalLadder]) -> bool:
    if ladder is None:
        return False
    return any(abs(level - c) <= CRITICAL_BAND for c in ladder.finite_levels)


def _refine_vertices(inst: Instance, p_in: np.ndarray, p_out: np.ndarray, level: float) -> np.ndarray:
    """Bisect each edge between a sublevel and a superlevel endpoint."""
    lo, hi = p_in.copy(), p_out.copy()
    mid = 0.5 * (lo + hi)
    active = np.ones(len(lo), dtype=bool)
    for _ in range(MAX_BISECT):
        if not active.any():
            break
        idx = np.nonzero(active)[0]
        m = 0.5 * (lo[idx] + hi[idx])
        v = log_modulus(inst, m)
        mid[idx] = m
        done = np.abs(v - level) <= VERTEX_TOL
        below = v < level
        lo[idx[below]] = m[below]
        hi[idx[~below]] = m[~below]
        active[idx[done]] = False
    return mid


def _ambiguous_joined(inst: Instance, grid: Grid, level: float, ii: np.ndarray, jj: np.ndarray) -> np.ndarray:
    """For ambiguous cells: is the sublevel diagonal connected inside the cell?

    A cell holding a saddle is joined iff the saddle's modulus is below the
    level; otherwise the cell centre decides.
    """
    xs, ys = grid.xs, grid.ys
    centers = 0.5 * (xs[jj] + xs[jj + 1]) + 0.5j * (ys[ii] + ys[ii + 1])
    joined = log_modulus(inst, centers) < level
    if len(grid.crit_locations):
        ci = np.searchsorted(ys, grid.crit_locations.imag) - 1
        cj = np.searchsorted(xs, grid.crit_locations.real) - 1
        lookup = {(int(a), int(b)): k for k, (a, b) in enumerate(zip(ci, cj))}
        for n, (a, b) in enumerate(zip(ii, jj)):
            k = lookup.get((int(a), int(b)))
            if k is not None:
                joined[n] = grid.crit_levels[k] < level
    return joined


def _march(inst: Instance, grid: Grid, level: float, ladder: Optional[CriticalLadder]):
    """Marching squares plus component labels for one level.

    Returns ``(labels, n_labels, contours)`` where labels index the sublevel
    nodes (0 for superlevel nodes).
    """
    V = grid.values
    ny, nx = V.shape
    B = V < level
    a, b, c, d = B[:-1, :-1], B[:-1, 1:], B[1:, 1:], B[1:, :-1]
    ac = a & c & ~b & ~d
    bd = b & d & ~a & ~c
    amb = ac | bd
    ai, aj = np.nonzero(amb)
    if len(ai) and _near_critical(level, ladder):
        raise SaddleAtLevel(f"ambiguous cells at level {level:.12g}, within {CRITICAL_BAND} of a critical modulus")
    joined_cells = np.zeros(amb.shape, dtype=bool)
    if len(ai):
        joined_cells[ai, aj] = _ambiguous_joined(inst, grid, level, ai, aj)

    labels, n = ndimage.label(B)
    jn = joined_cells & amb
    if jn.any():
        ji, jj = np.nonzero(jn & ac)
        ki, kj = np.nonzero(jn & bd)
        src = np.concatenate([labels[ji, jj], labels[ki, kj + 1]])
        dst = np.concatenate([labels[ji + 1, jj + 1], labels[ki + 1, kj]])
        graph = coo_matrix((np.ones(len(src)), (src, dst)), shape=(n + 1, n + 1))
        _, merged = connected_components(graph, directed=False)
        uniq, inv = np.unique(merged[labels[B]], return_inverse=True)
        labels = np.zeros_like(labels)
        labels[B] = inv + 1
        n = len(uniq)

    NH = ny * (nx - 1)
    I, J = np.nonzero((a != b) | (b != c) | (c != d))
    if len(I) == 0:
        return labels, n, []
    ca, cb_, cc, cd = a[I, J], b[I, J], c[I, J], d[I, J]
    e_bot = I * (nx - 1) + J
    e_top = (I + 1) * (nx - 1) + J
    e_left = NH + I * nx + J
    e_right = e_left + 1
    fb, ft, fl, fr = ca != cb_, cd != cc, ca != cd, cb_ != cc
    c_ac, c_bd, c_join = ac[I, J], bd[I, J], joined_cells[I, J]
    c_amb = c_ac | c_bd

    seg_a: List[np.ndarray] = []
    seg_b: List[np.ndarray] = []
    plain = ~c_amb
    for (fa, ea), (fz, ez) in [
        ((fb, e_bot), (ft, e_top)), ((fb, e_bot), (fl, e_left)), ((fb, e_bot), (fr, e_right)),
        ((ft, e_top), (fl, e_left)), ((ft, e_top), (fr, e_right)), ((fl, e_left), (fr, e_right)),
    ]:
        m = plain & fa & fz
        seg_a.append(ea[m])
        seg_b.append(ez[m])
    br_tl = (c_ac & c_join) | (c_bd & ~c_join)
    bl_tr = c_amb & ~br_tl
    seg_a += [e_bot[br_tl], e_top[br_tl], e_bot[bl_tr], e_top[bl_tr]]
    seg_b += [e_right[br_tl], e_left[br_tl], e_left[bl_tr], e_right[bl_tr]]
    sa = np.concatenate(seg_a)
    sb = np.concatenate(seg_b)

    edges, inv = np.unique(np.concatenate([sa, sb]), return_inverse=True)
    ns = len(sa)
    ua, ub = inv[:ns], inv[ns:]
    ne = len(edges)
    src = np.concatenate([ua, ub])
    dst = np.concatenate([ub, ua])
    order = np.argsort(src, kind="stable")
    src, dst = src[order], dst[order]
    fill = np.bincount(src, minlength=ne)
    first = np.concatenate([[0], np.cumsum(fill)[:-1]])
    slot = np.arange(len(src)) - first[src]
    nbr = np.full((ne, 2), -1, dtype=np.int64)
    nbr[src, slot] = dst

    # edge endpoints and the node on the sublevel side
    horiz = edges < NH
    hi_ = np.where(horiz, edges // (nx - 1), (edges - NH) // nx)
    hj = np.where(horiz, edges % (nx - 1), (edges - NH) % nx)
    i2 = np.where(horiz, hi_, hi_ + 1)
    j2 = np.where(horiz, hj + 1, hj)
    in_first = B[hi_, hj]
    si = np.where(in_first, hi_, i2)
    sj = np.where(in_first, hj, j2)
    oi = np.where(in_first, i2, hi_)
    oj = np.where(in_first, j2, hj)
    p_in = grid.xs[sj] + 1j * grid.ys[si]
    p_out = grid.xs[oj] + 1j * grid.ys[oi]
    verts = _refine_vertices(inst, p_in, p_out, level)
    edge_label = labels[si, sj]

    contours = []
    visited = np.zeros(ne, dtype=bool)
    starts = list(np.nonzero(fill == 1)[0]) + list(range(ne))
    for s in starts:
        if visited[s]:
            continue
        chain = [s]
        visited[s] = True
        prev, cur = -1, s
        closed = False
        while True:
            nxt = -1
            for cand in nbr[cur, : fill[cur]]:
                if cand != prev and not visited[cand]:
                    nxt = cand
                    break
            if nxt < 0:
                closed = fill[cur] == 2 and s in nbr[cur, :2] and len(chain) > 2
                break
            visited[nxt] = True
            chain.append(nxt)
            prev, cur = cur, nxt
        idx = np.asarray(chain)
        contours.append(ContourPolyline(verts[idx], bool(closed), level, int(edge_label[s])))
    return labels, n, contours


def extract_contours(inst: Instance, window: Window, level: float, ladder: Optional[CriticalLadder] = None,
                     grid: Optional[Grid] = None) -> List[ContourPolyline]:
    if not math.isfinite(level):
        raise ValueError("level must be finite")
    if grid is None:
        grid = sample_grid(inst, window, [level], ladder)
    return _march(inst, grid, level, ladder)[2]


def _winding(points: np.ndarray, poly: np.ndarray) -> np.ndarray:
    """Crossing-rule winding numbers of ``points`` about a closed polygon."""
    x0, y0 = poly.real, poly.imag
    x1, y1 = np.roll(x0, -1), np.roll(y0, -1)
    px = points.real[:, None]
    py = points.imag[:, None]
    is_left = (x1 - x0) * (py - y0) - (px - x0) * (y1 - y0)
    up = (y0 <= py) & (y1 > py) & (is_left > 0)
    down = (y0 > py) & (y1 <= py) & (is_left < 0)
    return up.sum(axis=1) - down.sum(axis=1)


def _edge_distance(p: complex, poly: np.ndarray) -> float:
    a = poly
    ab = np.roll(poly, -1) - a
    den = np.abs(ab) ** 2
    with np.errstate(invalid="ignore", divide="ignore"):
        t = np.where(den > 0, ((p - a) * ab.conj()).real / den, 0.0)
    t = np.clip(t, 0.0, 1.0)
    return float(np.min(np.abs(p - (a + t * ab))))


def point_in_polygon(p: complex, poly: ContourPolyline, toward: Optional[complex] = None) -> bool:
    """Winding-number containment test.

    A point within 1e-12 of an edge is first nudged 1e-9 toward ``toward``
    (the component's seed); without a seed it moves toward the vertex centroid.
    """
    if not poly.closed:
        raise OpenContour("point_in_polygon needs a closed contour")
    p = complex(p)
    if _edge_distance(p, poly.vertices) < EDGE_EPS:
        target = complex(np.mean(poly.vertices)) if toward is None else complex(toward)
        if target != p:
            p = p + NUDGE * (target - p) / abs(target - p)
    return bool(_winding(np.array([p]), poly.vertices)[0] != 0)


def components(inst: Instance, crit: CriticalLadder, window: Window, level: float,
               grid: Optional[Grid] = None) -> LevelTopology:
    """Connected components of ``{ln|f| < level}`` with their roots and critical points."""
    if _near_critical(level, crit):
        raise LevelTooCritical(f"level {level:.12g} lies within {CRITICAL_BAND} of a critical modulus")
    if grid is None:
        grid = sample_grid(inst, window, [level], crit)
    labels, n, contours = _march(inst, grid, level, crit)

    outer: Dict[int, int] = {}
    has_open = set()
    for k, cpoly in enumerate(contours):
        if not cpoly.closed:
            has_open.add(cpoly.component)
            continue
        cur = outer.get(cpoly.component)
        if cur is None or cpoly.area() > contours[cur].area():
            outer[cpoly.component] = k
    closed_labels = [lab for lab in outer if lab not in has_open]

    def owner(z: complex) -> Optional[int]:
        best, best_area = None, math.inf
        for lab in closed_labels:
            poly = contours[outer[lab]]
            if point_in_polygon(z, poly):
                area = poly.area()
                if area < best_area:
                    best, best_area = lab, area
        return best

    root_owner = {}
    orphans = []
    for i, r in enumerate(inst.roots):
        lab = owner(r.location)
        if lab is None:
            orphans.append(i)
        root_owner[i] = lab
    if orphans:
        raise OrphanRoot(orphans, level)

    crit_owner = {}
    unassigned = []
    for i, p in enumerate(crit.points):
        if not p.log_critical_modulus < level:
            continue
        lab = owner(p.location)
        if lab is None:
            unassigned.append(i)
        else:
            crit_owner[i] = lab

    comps = []
    for lab in closed_labels:
        roots = tuple(i for i, o in root_owner.items() if o == lab)
        cps = tuple(i for i, o in crit_owner.items() if o == lab)
        comps.append(Component(
            outer[lab], roots, cps,
            sum(inst.roots[i].multiplicity for i in roots),
            sum(crit.points[i].multiplicity for i in cps),
        ))
    comps.sort(key=lambda c: (c.roots[0] if c.roots else len(inst.roots), c.outer_contour))
    return LevelTopology(level, contours, comps, tuple(unassigned), len(has_open))
