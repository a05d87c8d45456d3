"""JSON instance and report files (schema version 1, see docs/format.md)."""

from __future__ import annotations

import json
import math
from typing import Any, Dict, Optional

from . import __version__
from .core import Instance, RootEntry
from .critical import CriticalLadder, Rung

SCHEMA_VERSION = "1"


class FormatError(ValueError):
    pass


def _num(x: float) -> Optional[float]:
    # JSON has no infinities; -inf (a multiple root's modulus) becomes null
    return float(x) if math.isfinite(x) else None


def instance_to_dict(inst: Instance, seed: Optional[int] = None) -> Dict[str, Any]:
    out: Dict[str, Any] = {"schema_version": SCHEMA_VERSION}
    if seed is not None:
        out["seed"] = int(seed)
    out["roots"] = [
        {"re": r.location.real, "im": r.location.imag, "multiplicity": r.multiplicity} for r in inst.roots
    ]
    return out


def dumps_instance(inst: Instance, seed: Optional[int] = None) -> str:
    return json.dumps(instance_to_dict(inst, seed), indent=2) + "\n"


def instance_from_dict(data: Any) -> Instance:
    if not isinstance(data, dict):
        raise FormatError("instance file must hold a JSON object")
    version = data.get("schema_version")
    if version != SCHEMA_VERSION:
        raise FormatError(f"unsupported schema_version {version!r} (expected {SCHEMA_VERSION!r})")
    roots = data.get("roots")
    if not isinstance(roots, list) or not roots:
        raise FormatError("'roots' must be a non-empty array")
    entries = []
    try:
        for r in roots:
            m = r.get("multiplicity", 1)
            if isinstance(m, bool) or not isinstance(m, int):
                raise FormatError(f"multiplicity must be an integer, got {m!r}")
            entries.append(RootEntry(complex(float(r["re"]), float(r["im"])), m))
    except (KeyError, TypeError, AttributeError) as exc:
        raise FormatError(f"malformed root entry: {exc}") from exc
    except ValueError as exc:
        raise FormatError(str(exc)) from exc
    try:
        return Instance(tuple(entries))
    except ValueError:
        return Instance.from_pairs(entries)


def loads_instance(text: str) -> Instance:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON: {exc}") from exc
    return instance_from_dict(data)


def read_instance(path) -> Instance:
    with open(path, encoding="utf-8") as fh:
        return loads_instance(fh.read())


def seed_of(path) -> Optional[int]:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh).get("seed")


def ladder_to_dict(ladder: CriticalLadder, rungs=None) -> Dict[str, Any]:
    out: Dict[str, Any] = {
        "points": [
            {
                "re": p.location.real,
                "im": p.location.imag,
                "multiplicity": p.multiplicity,
                "log_critical_modulus": _num(p.log_critical_modulus),
                "residual": p.residual,
            }
            for p in ladder.points
        ],
        "total_multiplicity": ladder.total_multiplicity,
    }
    if rungs is not None:
        out["rungs"] = [rung_to_dict(r) for r in rungs]
        out["degenerate"] = any(r.degenerate for r in rungs)
    return out


def rung_to_dict(r: Rung) -> Dict[str, Any]:
    lo, hi = r.bracket
    return {
        "level": r.level,
        "points": list(r.indices),
        "multiplicity": r.multiplicity,
        "bracket": [lo, hi],
        "degenerate": r.degenerate,
    }


def report_to_dict(rep) -> Dict[str, Any]:
    return {
        "schema_version": SCHEMA_VERSION,
        "tool_version": rep.version,
        "instance": {"digest": rep.digest, **instance_to_dict(rep.instance)},
        "ladder": ladder_to_dict(rep.ladder, rep.rungs),
        "levels": [
            {
                "level": rec.level,
                "kind": rec.kind,
                "components": rec.n_components,
                "expected_components": rec.expected_components,
                "skipped": rec.skipped or None,
            }
            for rec in rep.levels
        ],
        "verdicts": [
            {
                "level": v.level,
                "kind": v.kind,
                "component_index": v.component_index,
                "n_f": v.n_f,
                "n_fprime": v.n_fprime,
                "macdonald_ok": v.macdonald_ok,
                "count_method_agreement": v.count_method_agreement,
                "winding_f": v.winding_f,
                "winding_fprime": v.winding_fprime,
                "residual_f": v.residual_f,
                "residual_fprime": v.residual_fprime,
                "roots": list(v.roots),
                "critical": list(v.critical),
                "note": v.note or None,
            }
            for v in rep.verdicts
        ],
        "staircase": rep.staircase,
        "staircase_text": ",".join(map(str, rep.staircase_steps)),
        "staircase_ok": rep.staircase_ok,
        "overall_pass": rep.overall_pass,
        "notes": rep.notes,
        "grid": rep.grid,
        "timings": rep.timings,
    }


def batch_to_dict(summary) -> Dict[str, Any]:
    return {
        "schema_version": SCHEMA_VERSION,
        "tool_version": __version__,
        "n_trials": summary.n_trials,
        "seed": summary.seed,
        "degree_range": list(summary.degree_range),
        "n_pass": summary.n_pass,
        "overall_pass": summary.all_pass,
        "n_verdicts": len(summary.verdicts),
        "agreement_rate": summary.agreement_rate,
        "median_residual": _num(summary.median_residual),
        "staircase_distribution": dict(sorted(summary.staircase_distribution.items())),
        "failures": [
            {
                "index": t.index,
                "seed": t.seed,
                "digest": t.digest,
                "error": t.error or None,
                "report": report_to_dict(t.report) if t.report else None,
            }
            for t in summary.failures
        ],
        "trials": [
            {
                "index": t.index,
                "seed": t.seed,
                "n_zeros": t.n_zeros,
                "digest": t.digest,
                "overall_pass": t.overall_pass,
                "staircase": t.staircase,
                "staircase_ok": t.staircase_ok,
            }
            for t in summary.trials
        ],
    }
