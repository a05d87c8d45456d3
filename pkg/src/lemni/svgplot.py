"""Standalone SVG contour plots: one polyline group per level, roots as red dots."""

from __future__ import annotations

import colorsys
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence
from xml.sax.saxutils import escape

import numpy as np

from .core import Instance
from .critical import CriticalLadder, bracket_rungs, critical_points
from .errors import SaddleAtLevel
from .levelset import CRITICAL_BAND, Window, auto_window, extract_contours, sample_grid
from .verify import plan_levels


@dataclass(frozen=True)
class PlotSpec:
    levels: Sequence[float]
    window: Optional[Window] = None
    width: int = 600
    height: int = 600
    show_roots: bool = True
    show_critical: bool = False

    def __post_init__(self):
        lv = [float(x) for x in self.levels]
        if not lv:
            raise ValueError("at least one level is required")
        if not all(math.isfinite(x) for x in lv):
            raise ValueError("levels must be finite")
        if lv != sorted(lv):
            raise ValueError("levels must be sorted ascending")
        object.__setattr__(self, "levels", tuple(lv))
        if self.width < 16 or self.height < 16:
            raise ValueError("plot size must be at least 16 px")


def auto_levels(inst: Instance, ladder: Optional[CriticalLadder] = None, rel_gap: float = 0.01) -> List[float]:
    """Eight evenly spaced levels from below to above the ladder, plus every bracket pair."""
    ladder = ladder or critical_points(inst)
    rungs = bracket_rungs(ladder, rel_gap)
    planned = plan_levels(ladder, rungs)
    below, above = planned[0][0], planned[-1][0]
    levels = set(float(x) for x in np.linspace(below, above, 8))
    for r in rungs:
        levels.update(r.bracket)
    finite = ladder.finite_levels
    return sorted(L for L in levels if all(abs(L - c) > CRITICAL_BAND for c in finite))


def _color(k: int, n: int) -> str:
    hue = 0.66 * (1 - k / max(1, n - 1))
    r, g, b = colorsys.hsv_to_rgb(hue, 0.85, 0.8)
    return "#{:02x}{:02x}{:02x}".format(round(255 * r), round(255 * g), round(255 * b))


def render_svg(inst: Instance, spec: PlotSpec, grid: int = 512, ladder: Optional[CriticalLadder] = None) -> str:
    ladder = ladder or critical_points(inst)
    top = spec.levels[-1]
    win = spec.window or auto_window(inst, top, 0.25 * (inst.spread() + math.exp(top / inst.degree)), nx=grid)
    field = sample_grid(inst, win, spec.levels, ladder)
    W, H = spec.width, spec.height
    sx = W / (win.x_max - win.x_min)
    sy = H / (win.y_max - win.y_min)

    def px(z: complex) -> str:
        return f"{(z.real - win.x_min) * sx:.2f},{(win.y_max - z.imag) * sy:.2f}"

    out = [
        '<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{W}" height="{H}" '
        f'viewBox="0 0 {W} {H}">',
        f"<desc>ln|f| level curves for instance {inst.digest}, degree {inst.degree}; "
        f"window [{win.x_min:.6g}, {win.x_max:.6g}] x [{win.y_min:.6g}, {win.y_max:.6g}]</desc>",
        f'<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>',
    ]
    n = len(spec.levels)
    legend = []
    for k, level in enumerate(spec.levels):
        try:
            contours = extract_contours(inst, win, level, ladder, grid=field)
        except SaddleAtLevel:
            contours = extract_contours(inst, win, level, None, grid=field)
        color = _color(k, n)
        closed = sum(c.closed for c in contours)
        out.append(f'<g class="level" data-level="{level!r}" data-contours="{closed}" '
                   f'stroke="{color}" fill="none" stroke-width="1.2">')
        for c in contours:
            pts = list(c.vertices) + ([c.vertices[0]] if c.closed else [])
            out.append(f'<polyline points="{" ".join(px(z) for z in pts)}"/>')
        out.append("</g>")
        legend.append((color, level))

    if spec.show_critical:
        out.append('<g class="critical" stroke="black" stroke-width="1.5">')
        for p in ladder.points:
            x, y = map(float, px(p.location).split(","))
            out.append(f'<line x1="{x - 4:.2f}" y1="{y - 4:.2f}" x2="{x + 4:.2f}" y2="{y + 4:.2f}"/>')
            out.append(f'<line x1="{x - 4:.2f}" y1="{y + 4:.2f}" x2="{x + 4:.2f}" y2="{y - 4:.2f}"/>')
        out.append("</g>")
    if spec.show_roots:
        out.append('<g class="roots" fill="red" stroke="none">')
        for r in inst.roots:
            x, y = px(r.location).split(",")
            out.append(f'<circle cx="{x}" cy="{y}" r="4"/>')
        out.append("</g>")

    out.append('<g class="legend" font-family="sans-serif" font-size="11">')
    for k, (color, level) in enumerate(legend):
        y = 14 + 13 * k
        out.append(f'<rect x="6" y="{y - 8}" width="10" height="3" fill="{color}"/>')
        out.append(f'<text x="20" y="{y}">{escape(f"ln|f| = {level:.4f}")}</text>')
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
