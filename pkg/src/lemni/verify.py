"""Check ``n_f = n_f' + 1`` on every closed sublevel component across the ladder.

Test levels are chosen automatically: one below the lowest critical modulus,
a bracket pair around every rung, and one above the highest. Each component
is counted twice, by root/critical-point membership and by the argument
principle along its outer contour.
"""

from __future__ import annotations

import math
import os
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from statistics import median
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from . import __version__
from .core import Instance, RootEntry
from .counting import argument_principle_count, membership_count
from .critical import CriticalLadder, Rung, bracket_rungs, critical_points
from .errors import EpsilonTooLarge, LemniError, OrphanRoot
from .generator import GenSpec, generate, stream_output
from .levelset import CRITICAL_BAND, DEFAULT_GRID, LevelTopology, auto_window, components, sample_grid


@dataclass(frozen=True)
class VerifyConfig:
    rel_gap: float = 0.01
    grid: int = DEFAULT_GRID
    max_grid: int = 2048
    margin_frac: float = 0.25

    def __post_init__(self):
        if not 0 < self.rel_gap < 0.5:
            raise ValueError(f"rel_gap must lie in (0, 0.5), got {self.rel_gap}")
        if self.grid < 16:
            raise ValueError("grid must be at least 16")


@dataclass
class ComponentVerdict:
    level: float
    component_index: int
    n_f: int
    n_fprime: int
    macdonald_ok: bool
    count_method_agreement: bool
    kind: str = ""
    roots: Tuple[int, ...] = ()
    critical: Tuple[int, ...] = ()
    winding_f: Optional[int] = None
    winding_fprime: Optional[int] = None
    residual_f: Optional[float] = None
    residual_fprime: Optional[float] = None
    note: str = ""


@dataclass
class LevelRecord:
    level: float
    kind: str
    n_components: Optional[int] = None
    expected_components: Optional[int] = None
    skipped: str = ""


@dataclass
class VerificationReport:
    digest: str
    instance: Instance
    ladder: CriticalLadder
    rungs: List[Rung]
    levels: List[LevelRecord]
    verdicts: List[ComponentVerdict]
    overall_pass: bool
    staircase_ok: bool
    notes: List[str] = field(default_factory=list)
    grid: int = DEFAULT_GRID
    timings: Dict[str, float] = field(default_factory=dict)
    version: str = __version__
    topologies: Optional[Dict[float, LevelTopology]] = None

    @property
    def brackets(self) -> List[Tuple[float, float]]:
        return [r.bracket for r in self.rungs]

    @property
    def staircase(self) -> List[int]:
        return [rec.n_components for rec in self.levels if rec.n_components is not None]

    @property
    def staircase_steps(self) -> List[int]:
        """Staircase with repeats collapsed, e.g. ``[2, 1]`` for two simple roots."""
        return collapse_steps(self.staircase)

    @property
    def degenerate(self) -> bool:
        return any(r.degenerate for r in self.rungs)

    def verdicts_at(self, level: float) -> List[ComponentVerdict]:
        return [v for v in self.verdicts if v.level == level]


def collapse_steps(counts: Sequence[int]) -> List[int]:
    out: List[int] = []
    for c in counts:
        if not out or out[-1] != c:
            out.append(c)
    return out


def expected_component_count(inst: Instance, ladder: CriticalLadder, level: float) -> int:
    """Distinct roots minus the critical multiplicity merged below ``level``."""
    merged = sum(p.multiplicity for p in ladder.points if p.finite and p.log_critical_modulus < level)
    return len(inst.roots) - merged


def plan_levels(ladder: CriticalLadder, rungs: Sequence[Rung]) -> List[Tuple[float, str]]:
    if not rungs:
        # a single distinct root: every level shows the same picture
        return [(-1.0, "below"), (1.0, "above")]
    out = [(rungs[0].level - 3 * rungs[0].delta, "below")]
    for k, r in enumerate(rungs):
        lo, hi = r.bracket
        out.append((lo, f"bracket_lo:{k}"))
        out.append((hi, f"bracket_hi:{k}"))
    out.append((rungs[-1].level + 3 * rungs[-1].delta, "above"))
    return out


def _count_component(inst, topo: LevelTopology, idx: int, kind: str) -> ComponentVerdict:
    comp = topo.components[idx]
    n_f = membership_count(topo, idx, "function")
    n_fp = membership_count(topo, idx, "derivative")
    contour = topo.contours[comp.outer_contour]
    v = ComponentVerdict(topo.level, idx, n_f, n_fp, n_f == n_fp + 1, False, kind, comp.roots, comp.critical)
    try:
        wf = argument_principle_count(inst, contour, "function")
        wd = argument_principle_count(inst, contour, "derivative")
    except LemniError as exc:
        v.note = f"argument principle failed: {exc}"
        return v
    v.winding_f, v.winding_fprime = wf.count, wd.count
    v.residual_f, v.residual_fprime = wf.integral_residual, wd.integral_residual
    v.count_method_agreement = wf.count == n_f and wd.count == n_fp
    return v


def verify_instance(inst: Instance, config: Optional[VerifyConfig] = None,
                    extra_levels: Sequence[float] = (), keep_topology: bool = False) -> VerificationReport:
    config = config or VerifyConfig()
    t0 = time.perf_counter()
    ladder = critical_points(inst)
    rungs = bracket_rungs(ladder, config.rel_gap)
    t1 = time.perf_counter()
    notes = []
    for k, r in enumerate(rungs):
        if r.degenerate:
            notes.append(f"degenerate rung {k}: critical points {list(r.indices)} share log-modulus {r.level:.15g}")

    planned = plan_levels(ladder, rungs) + [(float(L), "extra") for L in extra_levels]
    planned.sort(key=lambda t: t[0])
    levels: List[LevelRecord] = []
    seen = set()
    finite = ladder.finite_levels
    for L, kind in planned:
        if L in seen:
            continue
        seen.add(L)
        rec = LevelRecord(L, kind)
        if any(abs(L - c) <= CRITICAL_BAND for c in finite):
            rec.skipped = "within the critical exclusion band"
            notes.append(f"level {L:.15g} skipped: {rec.skipped}")
        levels.append(rec)

    usable = [rec.level for rec in levels if not rec.skipped]
    top = max(usable)
    margin = config.margin_frac * (inst.spread() + math.exp(top / inst.degree))
    n = config.grid
    window = auto_window(inst, top, margin, nx=n)
    grid = sample_grid(inst, window, usable, ladder)

    verdicts: List[ComponentVerdict] = []
    topologies = {} if keep_topology else None
    for rec in levels:
        if rec.skipped:
            continue
        while True:
            try:
                topo = components(inst, ladder, window, rec.level, grid=grid)
                break
            except OrphanRoot:
                if 2 * n > config.max_grid:
                    raise
                n *= 2
                notes.append(f"grid refined to {n} after orphan root at level {rec.level:.6g}")
                window = window.with_resolution(n)
                grid = sample_grid(inst, window, usable, ladder)
        if topologies is not None:
            topologies[rec.level] = topo
        rec.n_components = len(topo.components)
        rec.expected_components = expected_component_count(inst, ladder, rec.level)
        if topo.unassigned_critical:
            notes.append(f"level {rec.level:.6g}: critical points {list(topo.unassigned_critical)} in no component")
        if topo.open_components:
            notes.append(f"level {rec.level:.6g}: {topo.open_components} component(s) touch the window edge")
        for idx in range(len(topo.components)):
            verdicts.append(_count_component(inst, topo, idx, rec.kind))
    t2 = time.perf_counter()

    staircase_ok = all(rec.n_components == rec.expected_components for rec in levels if not rec.skipped)
    overall = bool(verdicts) and all(v.macdonald_ok and v.count_method_agreement for v in verdicts)
    return VerificationReport(
        digest=inst.digest, instance=inst, ladder=ladder, rungs=rungs, levels=levels,
        verdicts=verdicts, overall_pass=overall, staircase_ok=staircase_ok, notes=notes, grid=n,
        timings={"critical": t1 - t0, "topology": t2 - t1, "total": t2 - t0},
        topologies=topologies,
    )


@dataclass
class TrialResult:
    index: int
    seed: int
    n_zeros: int
    digest: str
    overall_pass: bool
    staircase: List[int]
    staircase_ok: bool
    report: Optional[VerificationReport] = None
    error: str = ""


@dataclass
class BatchSummary:
    n_trials: int
    seed: int
    degree_range: Tuple[int, int]
    trials: List[TrialResult]

    @property
    def n_pass(self) -> int:
        return sum(t.overall_pass for t in self.trials)

    @property
    def failures(self) -> List[TrialResult]:
        return [t for t in self.trials if not t.overall_pass]

    @property
    def staircase_distribution(self) -> Counter:
        return Counter(",".join(map(str, collapse_steps(t.staircase))) for t in self.trials if not t.error)

    @property
    def verdicts(self) -> List[ComponentVerdict]:
        return [v for t in self.trials if t.report for v in t.report.verdicts]

    @property
    def agreement_rate(self) -> float:
        vs = self.verdicts
        return sum(v.count_method_agreement for v in vs) / len(vs) if vs else 0.0

    @property
    def median_residual(self) -> float:
        res = [r for v in self.verdicts for r in (v.residual_f, v.residual_fprime) if r is not None]
        return median(res) if res else math.nan

    @property
    def all_pass(self) -> bool:
        return self.n_pass == self.n_trials


def trial_spec(seed: int, index: int, degree_range: Tuple[int, int]) -> GenSpec:
    """Trial ``index`` uses the ``index``-th SplitMix64 output of ``seed`` as
    its own seed; its zero count is ``lo + trial_seed % (hi - lo + 1)``."""
    lo, hi = degree_range
    trial_seed = stream_output(seed, index)
    return GenSpec(lo + trial_seed % (hi - lo + 1), trial_seed)


def _run_trial(args) -> TrialResult:
    index, seed, degree_range, config = args
    spec = trial_spec(seed, index, degree_range)
    inst = generate(spec)
    try:
        rep = verify_instance(inst, config)
    except LemniError as exc:
        return TrialResult(index, spec.seed, spec.n_zeros, inst.digest, False, [], False,
                           error=f"{type(exc).__name__}: {exc}")
    return TrialResult(index, spec.seed, spec.n_zeros, inst.digest, rep.overall_pass,
                       rep.staircase, rep.staircase_ok, rep)


def thread_count(threads: Optional[int] = None) -> int:
    """Worker count: explicit argument, else ``LEMNI_THREADS`` (0 = all CPUs)."""
    if threads is None:
        threads = int(os.environ.get("LEMNI_THREADS", "1") or 1)
    if threads <= 0:
        threads = os.cpu_count() or 1
    return threads


def verify_batch(n_trials: int, degree_range: Tuple[int, int] = (2, 6), seed: int = 0,
                 config: Optional[VerifyConfig] = None, threads: Optional[int] = None) -> BatchSummary:
    if n_trials < 1:
        raise ValueError("n_trials must be at least 1")
    lo, hi = degree_range
    if not 1 <= lo <= hi:
        raise ValueError(f"invalid degree range {degree_range}")
    config = config or VerifyConfig()
    jobs = [(i, seed, (lo, hi), config) for i in range(n_trials)]
    workers = min(thread_count(threads), n_trials)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            trials = list(ex.map(_run_trial, jobs))
    else:
        trials = [_run_trial(j) for j in jobs]
    return BatchSummary(n_trials, seed, (lo, hi), trials)


def cluster_instance(base: Instance, target_root: int, epsilon: float) -> Instance:
    """Replace root ``target_root`` (multiplicity N) by N simple roots on a
    circle of radius ``epsilon`` around it."""
    target = base.roots[target_root]
    n = target.multiplicity
    ring = [RootEntry(target.location + epsilon * complex(math.cos(2 * math.pi * k / n), math.sin(2 * math.pi * k / n)))
            for k in range(n)]
    rest = [r for i, r in enumerate(base.roots) if i != target_root]
    return Instance.from_pairs(rest + ring)


class ClusterExperiment(NamedTuple):
    base: VerificationReport
    cluster: VerificationReport
    compared_levels: List[float]
    agree: bool


def _signature(report: VerificationReport, level: float) -> List[Tuple[int, int]]:
    return sorted((v.n_f, v.n_fprime) for v in report.verdicts_at(level))


def cluster_experiment(base: Instance, target_root: int, epsilon: float,
                       config: Optional[VerifyConfig] = None) -> ClusterExperiment:
    """Compare per-component counts of an instance and its clustered twin.

    The clustered twin is verified at its own levels plus every level of the
    base report; those shared levels, minus any lying inside a bracket of the
    cluster's own (sub-epsilon-scale) merges, must give identical counts.
    """
    if not 0 <= target_root < len(base.roots):
        raise IndexError(f"target_root {target_root} out of range")
    target = base.roots[target_root]
    if target.multiplicity < 2:
        raise ValueError("cluster experiment needs a target root of multiplicity >= 2")
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    others = [abs(r.location - target.location) for i, r in enumerate(base.roots) if i != target_root]
    if others and epsilon >= 1e-2 * min(others):
        raise EpsilonTooLarge(f"epsilon {epsilon} not below 1e-2 x nearest-root distance {min(others)}")

    base_rep = verify_instance(base, config)
    twin = cluster_instance(base, target_root, epsilon)
    base_levels = [rec.level for rec in base_rep.levels if rec.n_components is not None]
    twin_rep = verify_instance(twin, config, extra_levels=base_levels)

    own = []
    for r in twin_rep.rungs:
        pts = [twin_rep.ladder.points[i].location for i in r.indices]
        if all(abs(z - target.location) <= 5 * epsilon for z in pts):
            own.append(r.bracket)
    shared = [L for L in base_levels
              if any(rec.level == L and rec.n_components is not None for rec in twin_rep.levels)
              and not any(lo <= L <= hi for lo, hi in own)]
    agree = bool(shared) and all(_signature(base_rep, L) == _signature(twin_rep, L) for L in shared)
    return ClusterExperiment(base_rep, twin_rep, shared, agree)
