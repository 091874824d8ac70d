"""Variational-inequality view of the game: ``F``, natural residual, extragradient."""

from dataclasses import dataclass, field

import numpy as np

from .model import QuadraticGame


@dataclass
class VIResult:
    x: np.ndarray
    residual: float
    iterations: int
    converged: bool
    step: float
    history: list = field(default_factory=list, repr=False)


def F_map(game, x):
    """Stacked partial gradients ``(grad_{x_i} theta_i(x))_i``."""
    return game.F(np.asarray(x, dtype=float))


def vi_residual(game, S, x):
    """Natural-map residual ``||x - P_S(x - F(x))||``; zero exactly at solutions of VI(F, S)."""
    x = np.asarray(x, dtype=float)
    r = np.linalg.norm(x - S.project(x - game.F(x)), axis=-1)
    return float(r) if np.ndim(r) == 0 else r


def default_step(game):
    """``0.9 / ||J_F||_2`` for quadratic games, ``None`` when no Lipschitz constant is known."""
    if isinstance(game, QuadraticGame):
        L = game.lipschitz_F()
        return 0.9 / L if L > 0 else 1.0
    return None


def solve_vi_extragradient(game, S, x0, step=None, tol=1e-10, cap=100_000, keep_history=False):
    """Korpelevich extragradient for VI(F, S).

    ``x_half = P(x - t F(x))``, ``x_new = P(x - t F(x_half))``.  Without a
    known Lipschitz constant the step starts at ``1e-2`` and is halved
    whenever the residual increases.
    """
    x = S.project(np.asarray(x0, dtype=float))
    adaptive = False
    if step is None:
        step = default_step(game)
        if step is None:
            step, adaptive = 1e-2, True
    res = vi_residual(game, S, x)
    history = [x.copy()] if keep_history else []
    it = 0
    while res > tol and it < cap:
        x_half = S.project(x - step * game.F(x))
        x_new = S.project(x - step * game.F(x_half))
        res_new = vi_residual(game, S, x_new)
        it += 1
        if adaptive and res_new > res and step > 1e-12:
            step *= 0.5
            continue
        x, res = x_new, res_new
        if keep_history:
            history.append(x.copy())
    return VIResult(x, float(res), it, bool(res <= tol), float(step), history)


def multistart_solution(game, S, starts, tol=1e-10, agree=1e-6):
    """Extragradient from several starts; returns the common point if all runs agree."""
    sols = []
    for x0 in starts:
        r = solve_vi_extragradient(game, S, x0, tol=tol)
        if not r.converged:
            raise RuntimeError(f"extragradient did not converge from {np.asarray(x0).tolist()}")
        sols.append(r.x)
    spread = max(np.linalg.norm(s - sols[0]) for s in sols)
    if spread > agree:
        raise RuntimeError(f"extragradient runs disagree by {spread:.3g}; solution set is not a singleton")
    return sols[0]
