"""Zero counts inside a closed contour, two independent ways."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .core import Instance, critical_values, log_derivative, log_modulus, phase
from .errors import NonIntegerWinding, OpenContour, ZeroOnContour
from .levelset import ContourPolyline, LevelTopology

Which = Literal["function", "derivative"]

MAX_ROUNDS = 40
MAX_SAMPLES = 1 << 20
ZERO_RTOL = 1e-13
ACCEPT_RESIDUAL = 0.25


@dataclass(frozen=True)
class WindingCount:
    count: int
    integral_residual: float
    raw: float = 0.0
    samples: int = 0


def _target(inst: Instance, z: np.ndarray, which: Which):
    """``(ln|t|, t/|t|, |t'/t|)`` for the selected target t."""
    g = log_derivative(inst, z)
    if which == "function":
        return log_modulus(inst, z), phase(inst, z), np.abs(g)
    if which == "derivative":
        lm, ph = critical_values(inst, z)
        dg = np.zeros(z.shape, dtype=complex)
        with np.errstate(divide="ignore", invalid="ignore"):
            for loc, m in zip(inst.locations, inst.multiplicities):
                dg -= m / (z - loc) ** 2
            rate = np.abs(g + dg / g)
        return lm, ph, rate
    raise ValueError(f"which must be 'function' or 'derivative', got {which!r}")


def argument_principle_count(inst: Instance, contour: ContourPolyline, which: Which = "function") -> WindingCount:
    """Winding number of the target along the polyline.

    Phase increments between consecutive samples are accumulated as principal
    values. An edge gets a midpoint inserted, repeatedly, while its increment
    reaches pi/2 or while ``|t'/t| * length`` at either end does (the second
    test catches edges that sweep a whole turn and alias to a small increment).
    """
    if not contour.closed:
        raise OpenContour("argument principle needs a closed contour")
    z = np.append(contour.vertices, contour.vertices[:1])
    lm, ph, rate = _target(inst, z, which)
    floor = math.log(ZERO_RTOL) + float(np.max(lm))

    for _ in range(MAX_ROUNDS):
        if not np.all(np.isfinite(lm)) or np.any(lm < floor):
            raise ZeroOnContour(f"|{which}| vanishes (relative {ZERO_RTOL}) on the contour")
        step = np.angle(ph[1:] / ph[:-1])
        sweep = np.maximum(rate[1:], rate[:-1]) * np.abs(np.diff(z))
        bad = (np.abs(step) >= math.pi / 2) | (sweep >= math.pi / 2)
        if not bad.any():
            break
        if len(z) + bad.sum() > MAX_SAMPLES:
            raw = float(step.sum() / (2 * math.pi))
            raise NonIntegerWinding(raw, 0.5)
        idx = np.nonzero(bad)[0]
        mids = 0.5 * (z[idx] + z[idx + 1])
        mlm, mph, mrate = _target(inst, mids, which)
        z = np.insert(z, idx + 1, mids)
        lm = np.insert(lm, idx + 1, mlm)
        ph = np.insert(ph, idx + 1, mph)
        rate = np.insert(rate, idx + 1, mrate)
    else:
        raw = float(np.angle(ph[1:] / ph[:-1]).sum() / (2 * math.pi))
        raise NonIntegerWinding(raw, 0.5)

    raw = float(step.sum() / (2 * math.pi))
    count = int(round(raw))
    residual = abs(raw - count)
    if residual > ACCEPT_RESIDUAL:
        raise NonIntegerWinding(raw, residual)
    # polylines are not oriented consistently; zero counts are never negative
    return WindingCount(abs(count), residual, raw, len(z))


def membership_count(topology: LevelTopology, component_index: int, which: Which = "function") -> int:
    comp = topology.components[component_index]
    if which == "function":
        return comp.root_multiplicity
    if which == "derivative":
        return comp.critical_multiplicity
    raise ValueError(f"which must be 'function' or 'derivative', got {which!r}")
