"""Nikaido-Isoda function, its regularization and the regularized gap.

For a game with losses ``theta_i``::

    psi(x, y)   = sum_i theta_i(x) - theta_i(x_{-i}, y_i)
    psi_a(x, y) = psi(x, y) - a/2 ||x - y||^2
    V_a(x)      = max_{y in X} psi_a(x, y)

``psi_a(x, .)`` is strongly concave with modulus ``a`` when every
``theta_i`` is convex in ``x_i``, so the maximizer ``y^a(x)`` is unique.
"""

from dataclasses import dataclass

import numpy as np

from .geometry import Box, Singleton
from .model import QuadraticGame


class ConvergenceError(RuntimeError):
    """An iterative solver hit its iteration cap; ``result`` holds the best iterate."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


@dataclass(frozen=True)
class RegularizedEvaluator:
    """Holds the game, the regularization weight ``a`` and inner-solver settings."""

    game: object
    a: float
    tol_move: float = 1e-10
    tol_stat: float = 1e-8
    max_iter: int = 100_000

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError(f"regularization weight must be positive, got {self.a}")


@dataclass(frozen=True)
class BestResponse:
    y: np.ndarray
    iterations: int
    residual: float


def ni_psi(game, x, y):
    """Nikaido-Isoda function ``sum_i theta_i(x) - theta_i(x_{-i}, y_i)``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    total = 0.0
    for i in range(game.N):
        total = total + game.loss(i, x) - game.loss(i, game.swap(x, y, i))
    return total


def reg_psi_a(ev, x, y):
    """Regularized NI function ``psi(x, y) - a/2 ||x - y||^2``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return ni_psi(ev.game, x, y) - 0.5 * ev.a * np.sum((x - y) ** 2, axis=-1)


def _closed_form_ok(game, S):
    if not isinstance(S, Box) or not isinstance(game, QuadraticGame):
        return False
    D = game.own_hessian
    return np.count_nonzero(D - np.diag(np.diag(D))) == 0


def _inner_gradient(ev, u, z, weight, anchor, linear):
    g = -ev.game.own_grad_at(u, z) - ev.a * (z - u)
    if weight:
        g = g - weight * (z - anchor)
    if linear is not None:
        g = g - linear
    return g


def _inner_value(ev, u, z, weight, anchor, linear):
    game = ev.game
    val = -sum(game.loss(i, game.swap(u, z, i)) for i in range(game.N))
    val = val - 0.5 * ev.a * np.sum((u - z) ** 2) - 0.5 * weight * np.sum((z - anchor) ** 2)
    if linear is not None:
        val = val - linear @ z
    return float(val)


def regularized_argmax(ev, S, u, weight=0.0, anchor=None, linear=None):
    """Maximize ``h(z) = -sum_i theta_i(u_{-i}, z_i) - a/2||u-z||^2 - weight/2||z-anchor||^2 - <linear, z>`` over ``S``.

    This single strongly concave problem covers the best response
    (``weight = 0``, ``linear = None``) and both proximal-point subproblem
    evaluations.  Boxes with diagonal own-curvature are solved coordinatewise
    in closed form (``u`` may then be a batch); everything else uses
    projected gradient ascent with step ``1/L`` (quadratic games) or
    backtracking (generic smooth games).
    """
    game = ev.game
    u = np.asarray(u, dtype=float)
    anchor = np.zeros_like(u) if anchor is None else np.asarray(anchor, dtype=float)
    if linear is not None:
        linear = np.asarray(linear, dtype=float)

    def residual(z):
        g = _inner_gradient(ev, u, z, weight, anchor, linear)
        return np.linalg.norm(z - S.project(z + g), axis=-1)

    if isinstance(S, Singleton):
        z = np.broadcast_to(S.point, u.shape).copy()
        return BestResponse(z, 0, float(np.max(residual(z))))

    if _closed_form_ok(game, S):
        d = np.diag(game.own_hessian)
        num = -(u @ game.coupling.T) + ev.a * u + weight * anchor
        if linear is not None:
            num = num - linear
        z = np.clip(num / (d + ev.a + weight), S.lower, S.upper)
        res = residual(z)
        return BestResponse(z, 1, float(np.max(res)))

    if u.ndim > 1:
        rows = [regularized_argmax(ev, S, r, weight, a_r, linear)
                for r, a_r in zip(u, np.broadcast_to(anchor, u.shape))]
        return BestResponse(np.array([r.y for r in rows]), max(r.iterations for r in rows),
                            max(r.residual for r in rows))

    curv = game.own_curvature()
    backtrack = curv is None or not isinstance(game, QuadraticGame)
    L = (curv if curv is not None else 1.0) + ev.a + weight
    z = S.project(u)
    val = _inner_value(ev, u, z, weight, anchor, linear) if backtrack else None
    for it in range(1, ev.max_iter + 1):
        g = _inner_gradient(ev, u, z, weight, anchor, linear)
        if backtrack:
            t = 2.0 / L
            while True:
                z_new = S.project(z + t * g)
                v_new = _inner_value(ev, u, z_new, weight, anchor, linear)
                step = z_new - z
                if v_new >= val + g @ step - (0.5 / t) * (step @ step) - 1e-15 * abs(val) or t < 1e-14:
                    break
                t *= 0.5
            L = 1.0 / t
            val = v_new
        else:
            z_new = S.project(z + g / L)
        move = np.linalg.norm(z_new - z)
        z = z_new
        if move <= ev.tol_move:
            res = float(residual(z))
            if res <= ev.tol_stat:
                return BestResponse(z, it, res)
    best = BestResponse(z, ev.max_iter, float(residual(z)))
    raise ConvergenceError(f"inner maximization hit the cap of {ev.max_iter} iterations", best)


def best_response(ev, S, x):
    """The unique maximizer ``y^a(x)`` of ``psi_a(x, .)`` over ``S``."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        S._check_member(x)
    return regularized_argmax(ev, S, x)


def gap_Va(ev, S, x):
    """Regularized gap ``V_a(x) = psi_a(x, y^a(x))``; nonnegative on ``S``."""
    x = np.asarray(x, dtype=float)
    y = best_response(ev, S, x).y
    val = reg_psi_a(ev, x, y)
    return float(val) if np.ndim(val) == 0 else val


def grad_Va(ev, S, x):
    """Gradient of ``V_a`` (Danskin form with ``y = y^a(x)``)::

        sum_i [grad theta_i(x) - grad theta_i(x_{-i}, y_i)] - a (x - y)
              + [grad_{x_i} theta_i(x_{-i}, y_i)]_i
    """
    game = ev.game
    x = np.asarray(x, dtype=float)
    y = best_response(ev, S, x).y
    g = -ev.a * (x - y) + game.own_grad_at(x, y)
    for i in range(game.N):
        g = g + game.full_grad(i, x) - game.full_grad(i, game.swap(x, y, i))
    return g


def psi_convexity_in_x(ev, tol=1e-10):
    """Whether ``psi_a(., y)`` is convex: Hessian ``(C + C^T) - aI`` is PSD iff ``a <= delta``."""
    if not isinstance(ev.game, QuadraticGame):
        raise TypeError("convexity test is only available for quadratic games")
    return bool(ev.a <= ev.game.delta + tol)
