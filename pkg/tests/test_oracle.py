import numpy as np
import pytest

from gnepsharp.geometry import Box
from gnepsharp.model import build_quadratic_game
from gnepsharp.nikaido import RegularizedEvaluator, gap_Va
from gnepsharp.oracle import (GridSpec, GridTooLargeError, grid_dual_gap, grid_phi_residual, grid_points,
                              grid_scan_nne, grid_V, grid_Va, sampled_cone_gamma)

from conftest import feasible_points, random_instances


def test_grid_points_layout(box12):
    pts, cell = grid_points(box12, 3)
    assert pts.shape == (9, 2)
    np.testing.assert_allclose(pts[:3], [[1.0, 1.0], [1.0, 1.5], [1.0, 2.0]])
    assert abs(cell - np.sqrt(0.5)) < 1e-12
    pts, cell = grid_points(box12, (2, 1))
    np.testing.assert_allclose(pts, [[1.0, 1.5], [2.0, 1.5]])
    with pytest.raises(ValueError):
        GridSpec.of((2, 2, 2), 2)


def test_grid_guard():
    with pytest.raises(GridTooLargeError):
        grid_points(Box(np.zeros(3), np.ones(3)), 1000)


def test_grid_V_example(e1):
    ev = RegularizedEvaluator(e1.game, 0.5)
    est = grid_V(e1.game, e1.feasible, [1.5, 1.5], 101)
    assert est.value >= 1.625 - 1e-12 and est.value >= gap_Va(ev, e1.feasible, [1.5, 1.5])
    one = grid_V(e1.game, Box([1.5, 1.5], [1.5, 1.5]), [1.5, 1.5], 1)
    assert one.value == 0.0 and one.error == 0.0


def test_dual_gap_examples(e1):
    at_sol = grid_dual_gap(e1.game, e1.feasible, [1.0, 1.0], 41)
    assert at_sol.value <= at_sol.error
    assert grid_dual_gap(e1.game, e1.feasible, [2.0, 2.0], 41).value >= 2.5 - 1e-12
    assert grid_dual_gap(e1.game, Box([2.0, 2.0], [2.0, 2.0]), [2.0, 2.0], 1).value == 0.0


def test_scan_examples(e1, e0):
    np.testing.assert_allclose(grid_scan_nne(e1.game, e1.feasible, 41), [[1.0, 1.0]])
    np.testing.assert_allclose(grid_scan_nne(e0.game, e0.feasible, 41), [[0.0, 0.0]])
    zero = build_quadratic_game((1, 1), {(0, 0): [[0.0]], (1, 1): [[0.0]]})
    assert len(grid_scan_nne(zero, Box([0, 0], [1, 1]), 11)) == 121


def test_phi_residual_examples(e1):
    ev = RegularizedEvaluator(e1.game, 0.5)
    x = np.array([1.0, 1.0])
    est = grid_phi_residual(ev, e1.feasible, x, x, 1.0, 81)
    assert est.value <= est.error
    bad = grid_phi_residual(ev, e1.feasible, x + 0.1, x, 1.0, 81)
    assert bad.value > 1e-3


def test_oracle_brackets_main_path():
    rng = np.random.default_rng(0)
    for inst in random_instances(4, players=(2,)):
        ev = RegularizedEvaluator(inst.game, inst.defaults["a"])
        S = inst.feasible
        diam = np.linalg.norm(S.upper - S.lower)
        for x in feasible_points(S, 5, rng):
            V = grid_V(inst.game, S, x, 61)
            Va = gap_Va(ev, S, x)
            assert V.value >= Va - V.error
            assert abs(V.value - Va) <= ev.a / 2 * diam ** 2 + V.error
            Va_grid = grid_Va(ev, S, x, 61)
            assert Va_grid.value <= Va + 1e-12 and Va - Va_grid.value <= Va_grid.error


def test_refinement_never_loses_more_than_error(e1):
    ev = RegularizedEvaluator(e1.game, 0.5)
    for x in ([1.5, 1.5], [1.9, 1.1]):
        coarse = grid_Va(ev, e1.feasible, x, 21)
        fine = grid_Va(ev, e1.feasible, x, 41)
        assert fine.value >= coarse.value - coarse.error


def test_sampled_cone_gamma(e1, e0):
    assert sampled_cone_gamma(e1.game, e1.feasible, [1.0, 1.0]) == 1.25
    assert sampled_cone_gamma(e0.game, e0.feasible, [0.0, 0.0]) == 0.0
