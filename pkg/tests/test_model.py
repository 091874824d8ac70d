import numpy as np
import pytest

from gnepsharp.model import (GameError, SmoothGame, StrategyProfile, build_quadratic_game, loss,
                             partial_grad)

from conftest import random_instances


def test_e1_C_and_delta(e1_game):
    np.testing.assert_allclose(e1_game.C, [[0.5, 0.25], [0.25, 0.5]])
    np.testing.assert_allclose(e1_game.C + e1_game.C.T, [[1.0, 0.5], [0.5, 1.0]])
    assert abs(e1_game.delta - 0.5) < 1e-10


def test_zero_game():
    g = build_quadratic_game((1, 1), {(0, 0): [[0.0]], (1, 1): [[0.0]]})
    assert np.all(g.C == 0) and g.delta == 0.0
    np.testing.assert_allclose(g.F([0.3, -0.7]), 0.0)
    np.testing.assert_allclose(partial_grad(g, 1, [2.0, 3.0]), 0.0)


def test_indefinite_game_builds_with_negative_delta():
    g = build_quadratic_game((1, 1), {(0, 0): [[1.0]], (0, 1): [[1.0]], (1, 0): [[1.0]], (1, 1): [[1.0]]})
    assert abs(g.delta + 1.0) < 1e-10
    assert not g.is_positive_definite


def test_loss_examples(e1_game):
    assert abs(loss(e1_game, 0, [1.5, 1.5]) - 1.6875) < 1e-12
    assert abs(loss(e1_game, 0, [1.0, 1.5]) - 0.875) < 1e-12
    assert loss(e1_game, 1, [0.0, 0.0]) == 0.0
    np.testing.assert_allclose(partial_grad(e1_game, 0, [1.0, 1.0]), [1.25])


def test_loss_accepts_strategy_profile(e1_game):
    x = StrategyProfile.from_blocks([[1.5], [1.5]])
    assert abs(loss(e1_game, 0, x) - 1.6875) < 1e-12
    np.testing.assert_allclose(x.blocks[1], [1.5])


def test_bad_player_index(e1_game):
    with pytest.raises(IndexError):
        loss(e1_game, 2, [1.0, 1.0])


def test_missing_offdiagonal_block_is_zero():
    g = build_quadratic_game((1, 1), {(0, 0): [[1.0]], (1, 1): [[1.0]], (0, 1): [[0.25]]})
    np.testing.assert_allclose(g.A(1, 0), [[0.0]])
    assert any("missing" in w for w in g.warnings)


def test_symmetry_tolerance():
    tiny = 1e-14
    with pytest.warns(UserWarning):
        g = build_quadratic_game((2,), {(0, 0): [[1.0, 0.1 + tiny], [0.1, 1.0]]})
    np.testing.assert_allclose(g.A(0, 0), g.A(0, 0).T)
    assert g.warnings
    with pytest.raises(GameError):
        build_quadratic_game((2,), {(0, 0): [[1.0, 0.2], [0.1, 1.0]]})


def test_total_loss_equals_xCx():
    rng = np.random.default_rng(1)
    for inst in random_instances(6):
        g = inst.game
        for x in rng.normal(size=(100, g.n)):
            assert abs(g.total_loss(x) - x @ g.C @ x) <= 1e-10 * max(1.0, abs(x @ g.C @ x))


def test_partial_grad_finite_differences():
    rng = np.random.default_rng(2)
    h = 1e-5
    for inst in random_instances(4):
        g = inst.game
        for x in rng.normal(size=(20, g.n)):
            for i in range(g.N):
                s = g.block(i)
                fd = np.empty(s.stop - s.start)
                for j, col in enumerate(range(s.start, s.stop)):
                    e = np.zeros(g.n)
                    e[col] = h
                    fd[j] = (g.loss(i, x + e) - g.loss(i, x - e)) / (2 * h)
                an = g.partial_grad(i, x)
                assert np.linalg.norm(an - fd) <= 1e-5 * max(1.0, np.linalg.norm(an))


def test_delta_below_rayleigh_quotients():
    rng = np.random.default_rng(4)
    for inst in random_instances(5):
        S = inst.game.C + inst.game.C.T
        for z in rng.normal(size=(100, inst.game.n)):
            assert inst.game.delta <= z @ S @ z / (z @ z) + 1e-12


def test_multidimensional_blocks_layout():
    blocks = {(0, 0): np.eye(2), (1, 1): [[2.0]], (0, 1): [[1.0], [2.0]], (1, 0): [[3.0, 4.0]]}
    g = build_quadratic_game((2, 1), blocks)
    x = np.array([1.0, -1.0, 0.5])
    x1, x2 = x[:2], x[2:]
    expect0 = 0.5 * x1 @ x1 + x2 @ np.array([[3.0, 4.0]]) @ x1
    assert abs(g.loss(0, x) - expect0) < 1e-12
    np.testing.assert_allclose(g.partial_grad(0, x), x1 + np.array([[3.0, 4.0]]).T @ x2)
    assert abs(g.total_loss(x) - x @ g.C @ x) < 1e-12


def test_smooth_game_gradient_check():
    f0 = lambda x: 0.5 * x[0] ** 2 + x[0] * x[1] ** 2
    f1 = lambda x: x[1] ** 4 / 4 + x[0] * x[1]
    g0 = lambda x: np.array([x[0] + x[1] ** 2])
    g1 = lambda x: np.array([x[1] ** 3 + x[0]])
    G0 = lambda x: np.array([x[0] + x[1] ** 2, 2 * x[0] * x[1]])
    G1 = lambda x: np.array([x[1], x[1] ** 3 + x[0]])
    game = SmoothGame((1, 1), [f0, f1], [g0, g1], [G0, G1])
    np.testing.assert_allclose(game.F([1.0, 2.0]), [5.0, 9.0])
    with pytest.raises(GameError):
        SmoothGame((1, 1), [f0, f1], [lambda x: np.array([x[0]]), g1], [G0, G1])
