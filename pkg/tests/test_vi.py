import math

import numpy as np

from gnepsharp.geometry import Box
from gnepsharp.model import build_quadratic_game
from gnepsharp.nikaido import RegularizedEvaluator, gap_Va
from gnepsharp.vi import F_map, solve_vi_extragradient, vi_residual

from conftest import random_instances


def test_F_and_residual_examples(e1_game, box12):
    np.testing.assert_allclose(F_map(e1_game, [1.0, 1.0]), [1.25, 1.25])
    assert vi_residual(e1_game, box12, [1.0, 1.0]) == 0.0
    assert abs(vi_residual(e1_game, box12, [2.0, 2.0]) - math.sqrt(2)) < 1e-12
    zero = build_quadratic_game((1, 1), {(0, 0): [[0.0]], (1, 1): [[0.0]]})
    np.testing.assert_allclose(F_map(zero, [3.0, 4.0]), 0.0)
    assert vi_residual(zero, Box([0, 0], [5, 5]), [3.0, 4.0]) == 0.0


def test_extragradient_examples(e1, e0):
    r = solve_vi_extragradient(e1.game, e1.feasible, [2.0, 2.0])
    assert r.converged and np.linalg.norm(r.x - [1.0, 1.0]) <= 1e-8
    r0 = solve_vi_extragradient(e0.game, e0.feasible, [1.0, 1.0])
    assert r0.converged and np.linalg.norm(r0.x) <= 1e-8
    at = solve_vi_extragradient(e1.game, e1.feasible, [1.0, 1.0])
    assert at.iterations == 0 and at.converged


def test_iteration_cap_is_reported(e1):
    r = solve_vi_extragradient(e1.game, e1.feasible, [2.0, 2.0], cap=1, tol=1e-30)
    assert not r.converged and r.iterations == 1


def test_certificates_agree_and_starts_agree():
    for inst in random_instances(10, seed0=100):
        S, g = inst.feasible, inst.game
        ev = RegularizedEvaluator(g, inst.defaults["a"])
        sols = [solve_vi_extragradient(g, S, x0) for x0 in (S.lower, S.upper)]
        assert all(s.converged for s in sols)
        assert np.linalg.norm(sols[0].x - sols[1].x) <= 1e-6
        for s in sols:
            assert (s.residual <= 1e-8) == (gap_Va(ev, S, s.x) <= 1e-6)


def test_adaptive_step_without_lipschitz_constant(e1):
    class Opaque:
        def __init__(self, g):
            self.g = g

        def F(self, x):
            return self.g.F(x)

    r = solve_vi_extragradient(Opaque(e1.game), e1.feasible, [2.0, 2.0])
    assert r.converged and np.linalg.norm(r.x - 1.0) < 1e-8
