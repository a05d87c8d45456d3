import math

import numpy as np
import pytest
from scipy import ndimage

from lemni.core import Instance, log_modulus
from lemni.critical import critical_points, merge_brackets
from lemni.errors import LevelTooCritical, OpenContour, SaddleAtLevel
from lemni.generator import GenSpec, generate
from lemni.levelset import (
    ContourPolyline,
    Window,
    auto_window,
    components,
    extract_contours,
    point_in_polygon,
    sample_grid,
)

from .conftest import circle_polyline, random_instance

LN_HALF, LN_3HALF = math.log(0.5), math.log(1.5)


def oracle_component_count(inst, level, n=801, half=3.0):
    """Plain uniform-grid flood fill, no refinement or saddle handling."""
    x = np.linspace(-half, half, n)
    z = x[None, :] + 1j * x[:, None]
    _, count = ndimage.label(log_modulus(inst, z) < level)
    return count


def test_window_validation():
    with pytest.raises(ValueError):
        Window(1, 0, 0, 1)
    with pytest.raises(ValueError):
        Window(0, 1, 0, 1, 8, 64)


def test_auto_window_lemniscate_edges_above_level(lemniscate):
    win = auto_window(lemniscate, 0.0, 0.5)
    assert np.all(log_modulus(lemniscate, win.boundary(2000)) > 0.0)


def test_auto_window_contains_disk():
    inst = Instance.from_pairs([0])
    win = auto_window(inst, LN_HALF, 0.0)
    assert win.x_min <= -0.5 and win.x_max >= 0.5 and win.y_min <= -0.5 and win.y_max >= 0.5


def test_auto_window_five_roots_all_components_interior():
    inst = generate(GenSpec(5, 2026))
    ladder = critical_points(inst)
    level = min(ladder.finite_levels) - 0.1
    win = auto_window(inst, level, 0.1)
    # oracle: sign scan of a uniform grid over the window
    xs = np.linspace(win.x_min, win.x_max, 600)
    ys = np.linspace(win.y_min, win.y_max, 600)
    sub = log_modulus(inst, xs[None, :] + 1j * ys[:, None]) < level
    assert not (sub[0].any() or sub[-1].any() or sub[:, 0].any() or sub[:, -1].any())
    topo = components(inst, ladder, win, level)
    assert len(topo.components) == 5
    assert all(c.closed for c in topo.contours)


def test_circle_contour_area():
    inst = Instance.from_pairs([0])
    win = auto_window(inst, LN_HALF, 0.5, nx=256)
    (c,) = extract_contours(inst, win, LN_HALF)
    assert c.closed and len(c) >= 3
    assert c.area() == pytest.approx(math.pi / 4, rel=0.01)


@pytest.mark.parametrize("level, expected", [(LN_HALF, 2), (LN_3HALF, 1)])
def test_lemniscate_contours_match_flood_fill_oracle(lemniscate, level, expected):
    win = auto_window(lemniscate, level, 0.5)
    contours = extract_contours(lemniscate, win, level, critical_points(lemniscate))
    assert oracle_component_count(lemniscate, level) == expected
    assert len(contours) == expected
    assert all(c.closed for c in contours)


def test_vertices_on_level_set():
    rng = np.random.default_rng(4)
    for _ in range(5):
        inst = random_instance(rng, 5)
        ladder = critical_points(inst)
        lv = ladder.finite_levels
        level = 0.5 * (lv[0] + lv[1])
        win = auto_window(inst, level, 0.2)
        for c in extract_contours(inst, win, level, ladder):
            assert np.max(np.abs(log_modulus(inst, c.vertices) - level)) <= 1e-10


def test_lemniscate_components(lemniscate):
    ladder = critical_points(lemniscate)
    low = components(lemniscate, ladder, auto_window(lemniscate, LN_HALF, 0.5), LN_HALF)
    assert [(c.root_multiplicity, c.critical_multiplicity) for c in low.components] == [(1, 0), (1, 0)]
    high = components(lemniscate, ladder, auto_window(lemniscate, LN_3HALF, 0.5), LN_3HALF)
    assert [(c.root_multiplicity, c.critical_multiplicity) for c in high.components] == [(2, 1)]
    assert high.components[0].roots == (0, 1)


def test_cube_components(cube):
    ladder = critical_points(cube)
    topo = components(cube, ladder, auto_window(cube, LN_HALF, 0.5), LN_HALF)
    (c,) = topo.components
    assert (c.root_multiplicity, c.critical_multiplicity) == (3, 2)


def test_level_too_critical(lemniscate):
    ladder = critical_points(lemniscate)
    win = auto_window(lemniscate, 0.1, 0.5)
    with pytest.raises(LevelTooCritical):
        components(lemniscate, ladder, win, 0.0)
    with pytest.raises(LevelTooCritical):
        components(lemniscate, ladder, win, 5e-10)


def test_saddle_at_level():
    # lemniscate rotated by 45 degrees so the saddle's cones straddle grid diagonals
    w = complex(math.cos(math.pi / 4), math.sin(math.pi / 4))
    inst = Instance.from_pairs([w, -w])
    ladder = critical_points(inst)
    win = Window(-2.013, 1.987, -1.995, 2.005, 64, 64)
    plain = sample_grid(inst, win)
    with pytest.raises(SaddleAtLevel):
        extract_contours(inst, win, 0.0, ladder, grid=plain)
    # away from the critical modulus the same grid is fine
    assert len(extract_contours(inst, win, 0.3, ladder, grid=plain)) == 1


def test_point_in_polygon_examples(lemniscate):
    circle = circle_polyline(0, 1.0)
    assert point_in_polygon(0, circle)
    assert not point_in_polygon(2, circle)
    ladder = critical_points(lemniscate)
    (outer,) = extract_contours(lemniscate, auto_window(lemniscate, LN_3HALF, 0.5), LN_3HALF, ladder)
    assert point_in_polygon(1, outer) and point_in_polygon(-1, outer)
    assert not point_in_polygon(2, outer)


def test_point_on_edge_is_nudged_toward_seed():
    square = ContourPolyline(np.array([0, 1, 1 + 1j, 1j]), True, 0.0)
    assert point_in_polygon(0.5, square, toward=0.5 + 0.5j)
    assert not point_in_polygon(0.5, square, toward=0.5 - 0.5j)


def test_open_contour_rejected():
    with pytest.raises(OpenContour):
        point_in_polygon(0, ContourPolyline(np.array([0, 1, 1j]), False, 0.0))


def test_component_staircase_through_brackets():
    rng = np.random.default_rng(21)
    for _ in range(10):
        inst = random_instance(rng, 5)
        ladder = critical_points(inst)
        brackets = merge_brackets(ladder, 0.01)
        below = brackets[0][0] - 0.05
        above = brackets[-1][1] + 0.05
        levels = [below] + [x for b in brackets for x in b] + [above]
        win = auto_window(inst, above, 0.3)
        grid = sample_grid(inst, win, levels, ladder)
        counts = [len(components(inst, ladder, win, L, grid=grid).components) for L in levels]
        assert counts[0] == 5
        for k in range(len(brackets)):
            assert counts[1 + 2 * k] - counts[2 + 2 * k] == 1
        assert counts[-1] == 1


def test_grid_doubling_area_stability():
    rng = np.random.default_rng(31)
    inst = random_instance(rng, 4)
    ladder = critical_points(inst)
    lv = ladder.finite_levels
    for level in (lv[0] - 0.3, 0.5 * (lv[0] + lv[1]), lv[-1] + 0.3):
        win = auto_window(inst, level, 0.3)
        areas = []
        for n in (512, 1024):
            topo = components(inst, ladder, win.with_resolution(n), level)
            areas.append({c.roots: topo.contours[c.outer_contour].area() for c in topo.components})
        assert areas[0].keys() == areas[1].keys()
        for key in areas[0]:
            assert abs(areas[0][key] - areas[1][key]) <= 0.02 * areas[1][key]


def test_refinement_resolves_tiny_lobes():
    # two roots 1e-3 apart far from a third: the below-ladder lobes are far below a base cell
    inst = Instance.from_pairs([0.3, 0.301, -0.8j])
    ladder = critical_points(inst)
    level = ladder.finite_levels[0] - 0.01
    win = auto_window(inst, level, 0.3, nx=64)
    topo = components(inst, ladder, win, level)
    assert len(topo.components) == 3


def test_thin_neck_just_above_saddle(lemniscate):
    ladder = critical_points(lemniscate)
    win = auto_window(lemniscate, 1e-6, 0.5, nx=64)
    assert len(components(lemniscate, ladder, win, 1e-6).components) == 1
    assert len(components(lemniscate, ladder, win, -1e-6).components) == 2
