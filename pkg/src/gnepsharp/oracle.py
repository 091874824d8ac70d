"""Brute-force grid oracles.

These never call the iterative solvers: they enumerate a lattice over the
feasible set's bounding box and evaluate closed-form ``psi``, ``psi_a`` and
``F`` only.  Every maximum comes with a grid error ``L * h / 2`` where ``h``
is the cell diagonal and ``L`` a sampled Lipschitz estimate of the
objective.
"""

from dataclasses import dataclass

import numpy as np

from .geometry import Box
from .nikaido import ni_psi, reg_psi_a

MAX_GRID_POINTS = 10**7


class GridTooLargeError(ValueError):
    pass


@dataclass(frozen=True)
class GridSpec:
    """Points per dimension; a single int means the same count everywhere."""

    counts: tuple

    @classmethod
    def of(cls, counts, dim):
        if isinstance(counts, GridSpec):
            counts = counts.counts
        if np.isscalar(counts):
            counts = (int(counts),) * dim
        counts = tuple(int(c) for c in counts)
        if len(counts) != dim:
            raise ValueError(f"grid has {len(counts)} axes for a {dim}-dimensional set")
        if any(c < 1 for c in counts):
            raise ValueError("grid counts must be positive")
        return cls(counts)

    @property
    def size(self):
        return int(np.prod(self.counts))


@dataclass(frozen=True)
class GridEstimate:
    value: float
    error: float
    argmax: np.ndarray
    cell: float

    def __float__(self):
        return float(self.value)


def grid_points(S, grid):
    """Row-major lattice over the bounding box of ``S``, projected into ``S``.

    Returns
    -------
    points : ndarray, shape (m, n)
    cell : float
        Diagonal of one lattice cell.
    """
    spec = GridSpec.of(grid, S.dim)
    if spec.size > MAX_GRID_POINTS:
        raise GridTooLargeError(f"grid of {spec.size} points exceeds the guard of {MAX_GRID_POINTS}")
    lo, hi = S.bounding_box()
    axes = [np.linspace(l, u, c) if c > 1 else np.array([0.5 * (l + u)])
            for l, u, c in zip(lo, hi, spec.counts)]
    spacing = [(u - l) / (c - 1) if c > 1 else 0.0 for l, u, c in zip(lo, hi, spec.counts)]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.reshape(-1) for m in mesh], axis=-1)
    if not isinstance(S, Box):
        pts = S.project(pts)
    return pts, float(np.linalg.norm(spacing))


def lipschitz_estimate(fn, pts, h=1e-6, max_samples=4096, seed=0):
    """Largest central-difference gradient norm of ``fn`` over (a sample of) ``pts``."""
    pts = np.asarray(pts, dtype=float)
    if pts.shape[0] > max_samples:
        idx = np.random.default_rng(seed).choice(pts.shape[0], max_samples, replace=False)
        pts = pts[idx]
    n = pts.shape[1]
    grads = np.empty_like(pts)
    for j in range(n):
        e = np.zeros(n)
        e[j] = h
        grads[:, j] = (np.asarray(fn(pts + e)) - np.asarray(fn(pts - e))) / (2 * h)
    return float(np.max(np.linalg.norm(grads, axis=1)))


def _grid_max(fn, S, grid):
    pts, cell = grid_points(S, grid)
    vals = np.asarray(fn(pts), dtype=float).reshape(-1)
    j = int(np.argmax(vals))
    err = 0.0 if cell == 0.0 else 0.5 * cell * lipschitz_estimate(fn, pts)
    return GridEstimate(float(vals[j]), err, pts[j].copy(), cell)


def grid_V(game, S, x, grid):
    """Grid maximum of ``psi(x, .)``: the unregularized gap ``V(x)``."""
    x = np.asarray(x, dtype=float)
    return _grid_max(lambda Y: ni_psi(game, x, Y), S, grid)


def grid_Va(ev, S, x, grid):
    """Grid maximum of ``psi_a(x, .)``."""
    x = np.asarray(x, dtype=float)
    return _grid_max(lambda Y: reg_psi_a(ev, x, Y), S, grid)


def grid_dual_gap(game, S, y, grid):
    """Grid maximum of ``<F(w), y - w>`` over ``w``: the dual gap ``G(y)``."""
    y = np.asarray(y, dtype=float)
    return _grid_max(lambda W: np.sum(game.F(W) * (y - W), axis=-1), S, grid)


def grid_scan_nne(game, S, grid, abs_floor=1e-12):
    """Grid points whose natural residual is within twice the grid's smallest residual.

    The smallest residual on the lattice is the floor the grid can resolve;
    points up to ``2 * floor + abs_floor`` are returned.
    """
    pts, _ = grid_points(S, grid)
    res = np.linalg.norm(pts - S.project(pts - game.F(pts)), axis=-1)
    floor = float(res.min())
    return pts[res <= 2.0 * floor + abs_floor]


def grid_phi_residual(ev, S, u, x_k, r_k, grid):
    """Grid maximum over ``z`` of ``psi_a(u, z) - (1/r_k) <z - u, u - x_k>``."""
    u = np.asarray(u, dtype=float)
    x_k = np.asarray(x_k, dtype=float)
    d = (u - x_k) / r_k
    return _grid_max(lambda Z: reg_psi_a(ev, u, Z) - (Z - u) @ d, S, grid)


def grid_min_psi_a_against(ev, S, x_star, grid):
    """``min`` over grid ``x`` of ``psi_a(x, x*)`` (nonnegative when psi_a(., y) is convex)."""
    pts, _ = grid_points(S, grid)
    vals = reg_psi_a(ev, pts, np.asarray(x_star, dtype=float))
    return float(np.min(vals))


def sampled_cone_gamma(game, S, x_star, n_dirs=20000, t=1e-7, seed=0):
    """Minimum of ``<F(x*), z>`` over sampled unit feasible directions at ``x*``.

    A direction counts as tangent when ``x* + t z`` stays in ``S``.  The
    coordinate axes are always included, so for boxes the infimum over the
    tangent cone is hit exactly.  Meant for singleton solution sets.
    """
    x_star = np.asarray(x_star, dtype=float)
    n = x_star.size
    rng = np.random.default_rng(seed)
    Z = rng.normal(size=(n_dirs, n))
    Z = np.vstack([np.eye(n), -np.eye(n), Z])
    Z /= np.linalg.norm(Z, axis=1, keepdims=True)
    trial = x_star + t * Z
    inside = np.linalg.norm(S.project(trial) - trial, axis=1) <= 1e-14
    if not inside.any():
        return float("inf")
    return float(np.min(Z[inside] @ game.F(x_star)))
