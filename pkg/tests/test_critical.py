import math

import numpy as np
import pytest

from lemni.core import Instance, derivative_value, evaluate
from lemni.critical import (
    aberth,
    bracket_rungs,
    convex_hull,
    critical_points,
    in_convex_hull,
    merge_brackets,
    residual_tolerance,
)
from lemni.errors import DegenerateLadder

from .conftest import random_instance


def test_lemniscate_single_saddle(lemniscate):
    ladder = critical_points(lemniscate)
    (p,) = ladder.points
    assert p.location == pytest.approx(0)
    assert p.multiplicity == 1
    assert p.log_critical_modulus == pytest.approx(0.0, abs=1e-12)


def test_triple_root_shadow(cube):
    ladder = critical_points(cube)
    (p,) = ladder.points
    assert p.location == 0
    assert p.multiplicity == 2
    assert p.log_critical_modulus == -math.inf
    assert ladder.total_multiplicity == 2


def test_three_on_line_matches_quadratic_formula(three_on_line):
    # f' = 3 z**2 - 6 z + 2
    a, b, c = 3.0, -6.0, 2.0
    disc = math.sqrt(b * b - 4 * a * c)
    expected = sorted([(-b - disc) / (2 * a), (-b + disc) / (2 * a)])
    got = sorted(p.location.real for p in critical_points(three_on_line).points)
    assert got == pytest.approx(expected, abs=1e-12)
    assert expected == pytest.approx([0.42265, 1.57735], abs=1e-5)


def test_three_on_line_tie_is_reported(three_on_line):
    ladder = critical_points(three_on_line)
    x = 1 - 1 / math.sqrt(3)
    oracle = math.log(abs(x * (x - 1) * (x - 2)))
    assert oracle == pytest.approx(math.log(2 / (3 * math.sqrt(3))), abs=1e-14)
    assert oracle == pytest.approx(-0.955, abs=5e-4)
    for p in ladder.points:
        assert p.log_critical_modulus == pytest.approx(oracle, abs=1e-12)
    with pytest.raises(DegenerateLadder) as info:
        merge_brackets(ladder, 0.1)
    assert info.value.ties == [(0, 1)]
    (rung,) = bracket_rungs(ladder, 0.1)
    assert rung.degenerate and rung.multiplicity == 2


def test_lemniscate_bracket_straddles_zero(lemniscate):
    (lo, hi), = merge_brackets(critical_points(lemniscate), 0.1)
    assert lo < 0.0 < hi
    assert hi - lo == pytest.approx(0.2)


def test_bracket_contains_no_other_rung():
    rng = np.random.default_rng(5)
    for _ in range(50):
        ladder = critical_points(random_instance(rng, 6))
        levels = ladder.finite_levels
        for lo, hi in merge_brackets(ladder, 0.2):
            inside = [c for c in levels if lo < c < hi]
            assert len(inside) == 1


def test_rel_gap_range_enforced(lemniscate):
    ladder = critical_points(lemniscate)
    for bad in (0.0, 0.5, -1.0):
        with pytest.raises(ValueError):
            merge_brackets(ladder, bad)


def test_double_numerator_root_is_merged():
    # z**3 - 1: f' = 3 z**2 has a double zero at the origin, which is not a root of f
    inst = Instance.from_pairs([complex(math.cos(2 * math.pi * k / 3), math.sin(2 * math.pi * k / 3)) for k in range(3)])
    (p,) = critical_points(inst).points
    assert p.multiplicity == 2
    assert abs(p.location) < 1e-6
    assert p.log_critical_modulus == pytest.approx(0.0, abs=1e-12)


def test_aberth_solves_known_polynomial():
    coeffs = np.poly([1, -2, 0.5j, 3 - 1j])
    z, its = aberth(coeffs, 2 * np.exp(1j * (0.3 + np.arange(4) * np.pi / 2)))
    assert sorted(z, key=lambda w: (round(w.real, 6), w.imag)) == pytest.approx(
        sorted([1, -2, 0.5j, 3 - 1j], key=lambda w: (round(w.real, 6), w.imag)), abs=1e-12)
    assert its < 100


@pytest.mark.parametrize("degree", range(2, 13))
def test_completeness_residual_and_gauss_lucas(degree):
    rng = np.random.default_rng(100 + degree)
    for _ in range(20):
        inst = random_instance(rng, degree)
        ladder = critical_points(inst)
        assert ladder.total_multiplicity == inst.degree - 1
        tol = residual_tolerance(inst)
        for p in ladder.points:
            assert p.residual <= tol
            assert abs(derivative_value(inst, p.location)) <= tol
            assert in_convex_hull(p.location, list(inst.locations), 1e-9)


def test_ladder_sorted_and_solver_deterministic():
    rng = np.random.default_rng(8)
    inst = random_instance(rng, 7)
    a, b = critical_points(inst), critical_points(inst)
    assert a == b
    levels = [p.log_critical_modulus for p in a.points]
    assert levels == sorted(levels)


def test_log_critical_modulus_uses_core_evaluation():
    rng = np.random.default_rng(9)
    inst = random_instance(rng, 5)
    for p in critical_points(inst).points:
        assert p.log_critical_modulus == pytest.approx(evaluate(inst, p.location).log_modulus, abs=1e-12)


@pytest.mark.parametrize("mult", [2, 3, 4])
def test_cluster_critical_points_converge_to_multiple_root(mult):
    eps = 1e-4
    base = Instance.from_pairs([(0.2 + 0.1j, mult), 0.9, -0.7j])
    ring = [0.2 + 0.1j + eps * complex(math.cos(2 * math.pi * k / mult), math.sin(2 * math.pi * k / mult))
            for k in range(mult)]
    cluster = Instance.from_pairs(ring + [0.9, -0.7j])
    near = [p for p in critical_points(cluster).points if abs(p.location - (0.2 + 0.1j)) <= 5 * eps]
    assert sum(p.multiplicity for p in near) == mult - 1
    shadow = [p for p in critical_points(base).points if not p.finite]
    assert shadow[0].multiplicity == mult - 1


def test_convex_hull_handles_degenerate_sets():
    assert convex_hull([1 + 1j]) == [1 + 1j]
    assert len(convex_hull([0, 1, 2])) == 2
    assert in_convex_hull(1.0, [0, 1, 2])
    assert not in_convex_hull(1 + 1e-6j, [0, 1, 2])
    square = [0, 1, 1 + 1j, 1j, 0.5 + 0.5j]
    assert len(convex_hull(square)) == 4
    assert in_convex_hull(0.2 + 0.9j, square)
    assert not in_convex_hull(1.1 + 0.5j, square)


@pytest.mark.parametrize("seed", range(10))
def test_matches_companion_matrix_roots(seed):
    rng = np.random.default_rng(seed)
    inst = random_instance(rng, 2 + seed % 6)
    ladder = critical_points(inst)
    expected = np.roots(np.polyder(np.poly(inst.locations)))
    found = [p.location for p in ladder.points]
    assert len(found) == len(expected)
    for z in expected:
        assert min(abs(z - w) for w in found) < 1e-7
