"""Game data: players, block structure, quadratic and generic smooth losses.

Players are indexed from 0 in the Python API.  Quadratic games follow the
block convention

    theta_i(x) = 1/2 x_i^T A[i,i] x_i + sum_{l != i} x_l^T A[l,i] x_i

where ``A[l,i]`` has shape ``(n_l, n_i)``.  All evaluators accept either a
single flat profile of shape ``(n,)`` or a batch of profiles ``(m, n)``.
"""

import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .linalg import lambda_max, lambda_min, spectral_norm

SYMMETRY_TOL = 1e-12


class GameError(ValueError):
    """Malformed game data (shapes, symmetry, indices)."""


@dataclass(frozen=True)
class StrategyProfile:
    """A joint strategy ``x = (x_1, ..., x_N)`` with flat and block views."""

    flat: np.ndarray
    dims: tuple

    def __post_init__(self):
        flat = np.asarray(self.flat, dtype=float).reshape(-1)
        if flat.size != sum(self.dims):
            raise GameError(f"profile has length {flat.size}, dims {self.dims} need {sum(self.dims)}")
        object.__setattr__(self, "flat", flat)
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))

    @classmethod
    def from_blocks(cls, blocks):
        blocks = [np.atleast_1d(np.asarray(b, dtype=float)) for b in blocks]
        return cls(np.concatenate(blocks), tuple(b.size for b in blocks))

    @property
    def blocks(self):
        offsets = np.cumsum((0,) + self.dims)
        return [self.flat[offsets[i]:offsets[i + 1]] for i in range(len(self.dims))]

    def __array__(self, dtype=None, copy=None):
        return self.flat if dtype is None else self.flat.astype(dtype)

    def __len__(self):
        return self.flat.size


class Game:
    """Shared block bookkeeping for N-player games on R^n."""

    def __init__(self, dims):
        dims = tuple(int(d) for d in dims)
        if not dims or any(d <= 0 for d in dims):
            raise GameError(f"player dimensions must be positive, got {dims}")
        self.dims = dims
        self.N = len(dims)
        self.n = sum(dims)
        self.offsets = tuple(int(o) for o in np.cumsum((0,) + dims))

    def block(self, i):
        """Slice of player ``i``'s coordinates inside a flat profile."""
        self._check_player(i)
        return slice(self.offsets[i], self.offsets[i + 1])

    def split(self, x):
        x = self._profile(x)
        return [x[..., self.block(i)] for i in range(self.N)]

    def join(self, blocks):
        return np.concatenate([np.atleast_1d(np.asarray(b, dtype=float)) for b in blocks], axis=-1)

    def swap(self, x, y, i):
        """The profile ``(x_{-i}, y_i)``: ``x`` with player i's block taken from ``y``."""
        x = self._profile(x)
        y = self._profile(y)
        x, y = np.broadcast_arrays(x, y)
        z = np.array(x, dtype=float, copy=True)
        s = self.block(i)
        z[..., s] = y[..., s]
        return z

    def F(self, x):
        """Stacked partial gradients ``(grad_{x_i} theta_i(x))_i``."""
        x = self._profile(x)
        return np.concatenate([self.partial_grad(i, x) for i in range(self.N)], axis=-1)

    def own_grad_at(self, x, y):
        """Stacked ``grad_{x_i} theta_i(x_{-i}, y_i)``; the y-gradient structure of the NI function."""
        return np.concatenate(
            [self.partial_grad(i, self.swap(x, y, i)) for i in range(self.N)], axis=-1
        )

    def total_loss(self, x):
        return sum(self.loss(i, x) for i in range(self.N))

    def _check_player(self, i):
        if not (isinstance(i, (int, np.integer)) and 0 <= i < self.N):
            raise IndexError(f"player index {i!r} out of range for {self.N} players")

    def _profile(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[-1:] != (self.n,):
            raise GameError(f"expected profile(s) with trailing length {self.n}, got shape {x.shape}")
        return x


class QuadraticGame(Game):
    """Quadratic game with block matrices ``A[(l, i)]``.

    ``C`` is the block matrix with ``A[i,i]/2`` on the diagonal and ``A[l,i]``
    in block row ``l``, block column ``i``, so that ``sum_i theta_i(x) =
    x^T C x``.  ``delta`` is the smallest eigenvalue of ``C + C^T``.
    """

    def __init__(self, dims, blocks, C, delta, warnings_=()):
        super().__init__(dims)
        self.blocks = {k: np.array(v, dtype=float) for k, v in blocks.items()}
        for v in self.blocks.values():
            v.setflags(write=False)
        self.C = np.array(C, dtype=float)
        self.C.setflags(write=False)
        self.delta = float(delta)
        self.warnings = tuple(warnings_)
        n = self.n
        # Jacobian of F: block (i, i) = A_ii, block (i, l) = A_li^T
        J = np.zeros((n, n))
        for (l, i), A in self.blocks.items():
            if l == i:
                J[self.block(i), self.block(i)] = A
            else:
                J[self.block(i), self.block(l)] = A.T
        D = np.zeros((n, n))
        for i in range(self.N):
            D[self.block(i), self.block(i)] = J[self.block(i), self.block(i)]
        self.jacobian = J
        self.own_hessian = D  # blockdiag(A_ii)
        self.coupling = J - D
        for M in (self.jacobian, self.own_hessian, self.coupling):
            M.setflags(write=False)

    @property
    def sym(self):
        """``C + C^T``: the Hessian of the summed loss."""
        return self.C + self.C.T

    @property
    def is_positive_definite(self):
        return self.delta > 0.0

    def A(self, l, i):
        self._check_player(l)
        self._check_player(i)
        return self.blocks[(l, i)]

    def loss(self, i, x):
        self._check_player(i)
        x = self._profile(x)
        xi = x[..., self.block(i)]
        val = 0.5 * np.einsum("...a,ab,...b->...", xi, self.blocks[(i, i)], xi)
        for l in range(self.N):
            if l != i:
                xl = x[..., self.block(l)]
                val = val + np.einsum("...a,ab,...b->...", xl, self.blocks[(l, i)], xi)
        return val

    def partial_grad(self, i, x):
        self._check_player(i)
        x = self._profile(x)
        return x @ self.jacobian[self.block(i), :].T

    def full_grad(self, i, x):
        """Gradient of ``theta_i`` with respect to the whole profile."""
        self._check_player(i)
        x = self._profile(x)
        out = np.zeros_like(x)
        xi = x[..., self.block(i)]
        for l in range(self.N):
            if l == i:
                out[..., self.block(i)] = self.partial_grad(i, x)
            else:
                out[..., self.block(l)] = xi @ self.blocks[(l, i)].T
        return out

    def F(self, x):
        return self._profile(x) @ self.jacobian.T

    def own_grad_at(self, x, y):
        x = self._profile(x)
        y = self._profile(y)
        return y @ self.own_hessian.T + x @ self.coupling.T

    def lipschitz_F(self):
        return spectral_norm(self.jacobian)

    def own_curvature(self):
        """Largest eigenvalue of blockdiag(A_ii); curvature of the NI function in y."""
        return max(lambda_max(self.own_hessian), 0.0)

    def __repr__(self):
        return f"QuadraticGame(dims={self.dims}, delta={self.delta:.6g})"


def assemble_C(dims, blocks):
    offsets = np.cumsum((0,) + tuple(dims))
    n = offsets[-1]
    C = np.zeros((n, n))
    for (l, i), A in blocks.items():
        rows = slice(offsets[l], offsets[l + 1])
        cols = slice(offsets[i], offsets[i + 1])
        C[rows, cols] = 0.5 * A if l == i else A
    return C


def build_quadratic_game(dims, blocks):
    """Validate block data and assemble ``C`` and ``delta``.

    Parameters
    ----------
    dims : sequence of int
        Player dimensions ``n_1..n_N``.
    blocks : mapping
        ``(l, i) -> matrix`` with shape ``(n_l, n_i)``; 0-based player
        indices.  Missing off-diagonal blocks default to zero; missing
        diagonal blocks are an error.

    Diagonal blocks that are asymmetric beyond ``1e-12`` raise; smaller
    asymmetries are symmetrized with a warning.  Positive definiteness of
    ``C`` is not required, only recorded in ``delta``.
    """
    dims = tuple(int(d) for d in dims)
    N = len(dims)
    notes = []
    full = {}
    for key, A in blocks.items():
        l, i = (int(k) for k in key)
        if not (0 <= l < N and 0 <= i < N):
            raise GameError(f"block ({l},{i}) refers to a missing player (N={N})")
        A = np.atleast_2d(np.asarray(A, dtype=float))
        if A.shape != (dims[l], dims[i]):
            raise GameError(f"block ({l},{i}) has shape {A.shape}, expected {(dims[l], dims[i])}")
        full[(l, i)] = A
    for i in range(N):
        if (i, i) not in full:
            raise GameError(f"diagonal block ({i},{i}) is missing")
        A = full[(i, i)]
        asym = np.max(np.abs(A - A.T)) if A.size else 0.0
        if asym > SYMMETRY_TOL:
            raise GameError(f"diagonal block ({i},{i}) is not symmetric (max |A - A^T| = {asym:.3g})")
        if asym > 0.0:
            msg = f"diagonal block ({i},{i}) symmetrized (max |A - A^T| = {asym:.3g})"
            warnings.warn(msg, stacklevel=2)
            notes.append(msg)
            full[(i, i)] = 0.5 * (A + A.T)
    for l in range(N):
        for i in range(N):
            if (l, i) not in full:
                full[(l, i)] = np.zeros((dims[l], dims[i]))
                notes.append(f"block ({l},{i}) missing, treated as zero")
    C = assemble_C(dims, full)
    delta = lambda_min(C + C.T)
    return QuadraticGame(dims, full, C, delta, notes)


@dataclass
class SmoothGame(Game):
    """A game given by per-player callables.

    ``losses[i](x)`` returns ``theta_i(x)``, ``block_grads[i](x)`` returns
    ``grad_{x_i} theta_i(x)`` and ``full_grads[i](x)`` returns the gradient
    with respect to the whole profile.  Callables receive one flat profile.
    ``own_curvature`` is an optional upper bound on the curvature of
    ``theta_i`` in ``x_i`` used to pick inner step sizes.
    """

    dims: Sequence[int]
    losses: Sequence[Callable]
    block_grads: Sequence[Callable]
    full_grads: Sequence[Callable]
    curvature_bound: float | None = None
    check_points: int = 5
    seed: int = 0

    def __post_init__(self):
        Game.__init__(self, self.dims)
        if not (len(self.losses) == len(self.block_grads) == len(self.full_grads) == self.N):
            raise GameError("need one loss, block gradient and full gradient per player")
        if self.check_points:
            worst = self.check_gradients(np.random.default_rng(self.seed), self.check_points)
            if worst > 1e-5:
                raise GameError(f"supplied gradients disagree with finite differences (rel. err {worst:.3g})")

    def loss(self, i, x):
        self._check_player(i)
        return self._map(self.losses[i], x, scalar=True)

    def partial_grad(self, i, x):
        self._check_player(i)
        return self._map(self.block_grads[i], x)

    def full_grad(self, i, x):
        self._check_player(i)
        return self._map(self.full_grads[i], x)

    def own_curvature(self):
        return self.curvature_bound

    def check_gradients(self, rng, n_points=20, h=1e-6):
        """Worst relative error of the supplied gradients against central differences."""
        worst = 0.0
        for _ in range(n_points):
            x = rng.normal(size=self.n)
            for i in range(self.N):
                fd = np.array([
                    (self.losses[i](x + h * e) - self.losses[i](x - h * e)) / (2 * h)
                    for e in np.eye(self.n)
                ])
                g = np.asarray(self.full_grads[i](x), dtype=float)
                gi = np.asarray(self.block_grads[i](x), dtype=float)
                scale = max(np.linalg.norm(fd), 1.0)
                worst = max(worst, np.linalg.norm(g - fd) / scale,
                            np.linalg.norm(gi - fd[self.block(i)]) / scale)
        return worst

    def _map(self, fn, x, scalar=False):
        x = self._profile(x)
        if x.ndim == 1:
            out = fn(x)
            return float(out) if scalar else np.asarray(out, dtype=float)
        flat = x.reshape(-1, self.n)
        vals = [fn(row) for row in flat]
        if scalar:
            return np.asarray(vals, dtype=float).reshape(x.shape[:-1])
        return np.asarray(vals, dtype=float).reshape(x.shape[:-1] + (-1,))


def loss(game, i, x):
    """Loss of player ``i`` (0-based) at profile ``x``."""
    return game.loss(i, np.asarray(x, dtype=float))


def partial_grad(game, i, x):
    """``grad_{x_i} theta_i(x)``, length ``n_i``."""
    return game.partial_grad(i, np.asarray(x, dtype=float))
