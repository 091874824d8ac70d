"""Feasible sets, projections and polyhedral cone calculus.

Sets are boxes, polytopes ``{x : Gx <= h}`` or single points; all are
immutable.  Cones are stored in halfspace form ``{z : Mz <= 0}`` and/or as a
generator list whose conic hull is the cone.  In dimension <= 3 both forms
are always available and the generator list is canonical: unit extreme rays
of the pointed part plus +/- a basis of the lineality space.
"""

import itertools
import math

import numpy as np
from scipy.optimize import linprog, nnls

ACTIVE_TOL = 1e-8
EXACT_CONE_DIM = 3


class InfeasibleSetError(ValueError):
    pass


class NotInSetError(ValueError):
    pass


# ---------------------------------------------------------------------------
# halfspace projection (Dykstra)

def _polish(G, h, z, x, act_tol=1e-9):
    """Try to turn an approximate projection ``x`` into the exact KKT point.

    The active set is read off ``x``; the equality-constrained projection is
    accepted only if it is feasible with nonnegative multipliers.
    """
    norms = np.linalg.norm(G, axis=1)
    slack = (h - G @ x) / np.where(norms > 0, norms, 1.0)
    act = slack <= act_tol
    if not act.any():
        return z.copy() if np.all(G @ z <= h + 1e-12) else None
    GA = G[act]
    lam, *_ = np.linalg.lstsq(GA @ GA.T, GA @ z - h[act], rcond=None)
    cand = z - GA.T @ lam
    if np.all(lam >= -1e-12) and np.all(G @ cand <= h + 1e-12):
        return cand
    return None


def dykstra_halfspaces(G, h, z, tol=1e-12, max_sweeps=100_000, polish_every=8):
    """Project ``z`` onto ``{x : Gx <= h}`` by Dykstra's alternating projections.

    Stops when one full sweep moves the iterate by at most ``tol``.  Every
    ``polish_every`` sweeps the current active set is tried for an exact KKT
    solution, which usually ends the loop long before ``tol`` is reached.

    Returns
    -------
    x : ndarray
    sweeps : int
    """
    G = np.asarray(G, dtype=float)
    h = np.asarray(h, dtype=float)
    z = np.asarray(z, dtype=float)
    m = G.shape[0]
    if m == 0:
        return z.copy(), 0
    gg = np.einsum("ij,ij->i", G, G)
    x = z.copy()
    incr = np.zeros_like(G)
    for sweep in range(1, max_sweeps + 1):
        x_prev = x.copy()
        for j in range(m):
            if gg[j] == 0.0:
                continue
            y = x + incr[j]
            viol = G[j] @ y - h[j]
            x = y - (max(viol, 0.0) / gg[j]) * G[j]
            incr[j] = y - x
        if np.linalg.norm(x - x_prev) <= tol:
            break
        if sweep % polish_every == 0:
            cand = _polish(G, h, z, x)
            if cand is not None:
                return cand, sweep
    cand = _polish(G, h, z, x)
    return (cand if cand is not None else x), sweep


def _nullspace(A, n, rtol=1e-10):
    if A.shape[0] == 0:
        return np.eye(n)
    _, s, Vt = np.linalg.svd(A)
    scale = s[0] if s.size else 0.0
    rank = int(np.sum(s > rtol * max(scale, 1.0)))
    return Vt[rank:].T


def _unique_directions(vecs, tol=1e-9):
    out = []
    for v in vecs:
        v = v / np.linalg.norm(v)
        if not any(np.dot(v, w) > 1.0 - tol for w in out):
            out.append(v)
    return out


def _generators_from_halfspaces(M, n, tol=1e-10):
    """Canonical generators of ``{z : Mz <= 0}`` by active-set enumeration (small n)."""
    M = np.asarray(M, dtype=float).reshape(-1, n)
    L = _nullspace(M, n)  # lineality space
    k = L.shape[1]
    rays = []
    need = n - 1 - k
    if need >= 0:
        for S in itertools.combinations(range(M.shape[0]), need):
            A = np.vstack([M[list(S)], L.T]) if k else M[list(S)]
            null = _nullspace(A, n)
            if null.shape[1] != 1:
                continue
            r = null[:, 0]
            for s in (r, -r):
                if M.shape[0] == 0 or np.all(M @ s <= tol):
                    rays.append(s)
    rays = _unique_directions(rays)
    lineality = [b for col in L.T for b in (col, -col)]
    return np.array(rays).reshape(-1, n), np.array(lineality).reshape(-1, n)


class PolyhedralCone:
    """Polyhedral cone in R^n.

    Parameters
    ----------
    dim : int
    halfspaces : array_like, shape (m, n), optional
        Rows ``M`` with cone ``{z : Mz <= 0}``.
    generators : array_like, shape (k, n), optional
        Vectors whose conic hull is the cone.
    """

    def __init__(self, dim, halfspaces=None, generators=None):
        self.dim = int(dim)
        n = self.dim
        if halfspaces is None and generators is None:
            raise ValueError("a cone needs halfspaces or generators")
        self.halfspaces = None if halfspaces is None else np.asarray(halfspaces, dtype=float).reshape(-1, n)
        gens = None if generators is None else np.asarray(generators, dtype=float).reshape(-1, n)
        if gens is not None:
            gens = gens[np.linalg.norm(gens, axis=1) > 0]
        self.rays = None
        self.lineality = None
        if n <= EXACT_CONE_DIM:
            if self.halfspaces is None:
                # cone(G) = {z : Hz <= 0} with H the generators of {z : Gz <= 0}
                r, lin = _generators_from_halfspaces(gens, n)
                self.halfspaces = np.vstack([r, lin]).reshape(-1, n)
            self.rays, self.lineality = _generators_from_halfspaces(self.halfspaces, n)
            gens = np.vstack([self.rays, self.lineality]).reshape(-1, n)
        self.generators = gens

    @classmethod
    def whole_space(cls, n):
        return cls(n, halfspaces=np.zeros((0, n)))

    @classmethod
    def zero(cls, n):
        return cls(n, generators=np.zeros((0, n)))

    @property
    def exact(self):
        """True when the generator list is canonical (dimension <= 3)."""
        return self.rays is not None

    @property
    def is_trivial(self):
        """True for the zero cone ``{0}``."""
        if self.generators is not None:
            return self.generators.shape[0] == 0
        n = self.dim
        bounds = [(-1.0, 1.0)] * n
        for j in range(n):
            for sgn in (1.0, -1.0):
                c = np.zeros(n)
                c[j] = -sgn
                res = linprog(c, A_ub=self.halfspaces, b_ub=np.zeros(len(self.halfspaces)),
                              bounds=bounds, method="highs")
                if res.status == 0 and -res.fun > 1e-9:
                    return False
        return True

    def contains(self, z, tol=1e-10):
        z = np.asarray(z, dtype=float)
        if self.halfspaces is not None:
            return bool(np.all(self.halfspaces @ z <= tol * max(1.0, np.linalg.norm(z))))
        return np.linalg.norm(self.project(z) - z) <= tol * max(1.0, np.linalg.norm(z))

    def project(self, v):
        v = np.asarray(v, dtype=float)
        if self.generators is not None:
            if self.generators.shape[0] == 0:
                return np.zeros_like(v)
            lam, _ = nnls(self.generators.T, v)
            return self.generators.T @ lam
        x, _ = dykstra_halfspaces(self.halfspaces, np.zeros(len(self.halfspaces)), v)
        return x

    def polar(self):
        return PolyhedralCone(self.dim, halfspaces=self.generators, generators=self.halfspaces)

    def intersect(self, other):
        if self.dim != other.dim:
            raise ValueError("cone dimensions differ")
        if self.halfspaces is None or other.halfspaces is None:
            raise NotImplementedError(
                f"cone intersection needs halfspace forms (dimension {self.dim} > {EXACT_CONE_DIM})"
            )
        return PolyhedralCone(self.dim, halfspaces=np.vstack([self.halfspaces, other.halfspaces]))

    def __repr__(self):
        if self.exact:
            return f"PolyhedralCone(dim={self.dim}, rays={len(self.rays)}, lineality={len(self.lineality) // 2})"
        return f"PolyhedralCone(dim={self.dim}, inexact)"


def min_linear_over_unit_cone(c, cone, n_samples=64, seed=0, iters=500):
    """``inf { <c, z> : z in cone, ||z|| = 1 }``; ``+inf`` for the zero cone.

    Exact in dimension <= 3: a negative infimum equals ``-||P_K(-c)||``;
    otherwise it is attained on an extreme ray, or is 0 when the cone has a
    lineality space.  In higher dimension the value is a projected-gradient
    estimate from ``n_samples`` random starts (check ``cone.exact``).
    """
    c = np.asarray(c, dtype=float)
    if cone.is_trivial:
        return math.inf
    if cone.exact:
        p = cone.project(-c)
        pn = float(np.linalg.norm(p))
        if pn > 1e-13 * max(1.0, float(np.linalg.norm(c))):
            return -pn
        if len(cone.lineality):
            return 0.0
        return float(np.min(cone.rays @ c))
    rng = np.random.default_rng(seed)
    best = math.inf
    t = 0.1 / max(1.0, float(np.linalg.norm(c)))
    for _ in range(n_samples):
        z = cone.project(rng.normal(size=cone.dim))
        nz = np.linalg.norm(z)
        if nz < 1e-12:
            continue
        z /= nz
        for _ in range(iters):
            w = cone.project(z - t * c)
            nw = np.linalg.norm(w)
            if nw < 1e-12:
                break
            w /= nw
            if np.linalg.norm(w - z) < 1e-12:
                z = w
                break
            z = w
        best = min(best, float(c @ z))
    return best


# ---------------------------------------------------------------------------
# feasible sets

class ConvexSet:
    dim: int

    def project(self, z):
        raise NotImplementedError

    def distance(self, z):
        z = np.asarray(z, dtype=float)
        return np.linalg.norm(z - self.project(z), axis=-1)

    def contains(self, z, tol=1e-10):
        raise NotImplementedError

    def active_normals(self, x, tol=ACTIVE_TOL):
        raise NotImplementedError

    def tangent_cone(self, x, tol=ACTIVE_TOL):
        return tangent_cone(self, x, tol)

    def normal_cone(self, x, tol=ACTIVE_TOL):
        return normal_cone(self, x, tol)

    def _check_member(self, x, tol=ACTIVE_TOL):
        if not self.contains(x, tol):
            raise NotInSetError(f"point {np.asarray(x).tolist()} is not in {self!r}")


class Box(ConvexSet):
    """``{x : lower <= x <= upper}``."""

    def __init__(self, lower, upper):
        self.lower = np.asarray(lower, dtype=float).reshape(-1)
        self.upper = np.asarray(upper, dtype=float).reshape(-1)
        if self.lower.shape != self.upper.shape:
            raise ValueError("box bounds have different lengths")
        if np.any(self.lower > self.upper):
            raise InfeasibleSetError("box has lower > upper")
        self.dim = self.lower.size
        self.lower.setflags(write=False)
        self.upper.setflags(write=False)

    def project(self, z):
        return np.clip(np.asarray(z, dtype=float), self.lower, self.upper)

    def contains(self, z, tol=1e-10):
        z = np.asarray(z, dtype=float)
        return bool(np.all(z >= self.lower - tol) and np.all(z <= self.upper + tol))

    def active_normals(self, x, tol=ACTIVE_TOL):
        x = np.asarray(x, dtype=float)
        eye = np.eye(self.dim)
        rows = [-eye[j] for j in range(self.dim) if x[j] - self.lower[j] <= tol]
        rows += [eye[j] for j in range(self.dim) if self.upper[j] - x[j] <= tol]
        return np.array(rows).reshape(-1, self.dim)

    def bounding_box(self):
        return self.lower.copy(), self.upper.copy()

    def vertices(self):
        pts = itertools.product(*[sorted({lo, hi}) for lo, hi in zip(self.lower, self.upper)])
        return np.array(list(pts), dtype=float)

    def halfspaces(self):
        eye = np.eye(self.dim)
        return np.vstack([-eye, eye]), np.concatenate([-self.lower, self.upper])

    def __repr__(self):
        return f"Box({self.lower.tolist()}, {self.upper.tolist()})"


class Polytope(ConvexSet):
    """``{x : Gx <= h}``; nonemptiness is checked at construction."""

    def __init__(self, G, h):
        self.G = np.atleast_2d(np.asarray(G, dtype=float))
        self.h = np.asarray(h, dtype=float).reshape(-1)
        if self.G.shape[0] != self.h.size:
            raise ValueError(f"G has {self.G.shape[0]} rows but h has {self.h.size} entries")
        self.dim = self.G.shape[1]
        res = linprog(np.zeros(self.dim), A_ub=self.G, b_ub=self.h,
                      bounds=[(None, None)] * self.dim, method="highs")
        if res.status != 0:
            raise InfeasibleSetError(f"polytope is empty ({res.message})")
        norms = np.linalg.norm(self.G, axis=1)
        self._norms = np.where(norms > 0, norms, 1.0)
        self.G.setflags(write=False)
        self.h.setflags(write=False)

    def project(self, z):
        z = np.asarray(z, dtype=float)
        if z.ndim == 1:
            return dykstra_halfspaces(self.G, self.h, z)[0]
        return np.array([dykstra_halfspaces(self.G, self.h, row)[0] for row in z.reshape(-1, self.dim)]).reshape(z.shape)

    def contains(self, z, tol=1e-10):
        z = np.asarray(z, dtype=float)
        return bool(np.all(self.G @ z <= self.h + tol * self._norms))

    def active_normals(self, x, tol=ACTIVE_TOL):
        x = np.asarray(x, dtype=float)
        slack = (self.h - self.G @ x) / self._norms
        return self.G[slack <= tol]

    def bounding_box(self):
        lo, hi = np.empty(self.dim), np.empty(self.dim)
        for j in range(self.dim):
            c = np.zeros(self.dim)
            c[j] = 1.0
            for sgn, out in ((1.0, lo), (-1.0, hi)):
                res = linprog(sgn * c, A_ub=self.G, b_ub=self.h,
                              bounds=[(None, None)] * self.dim, method="highs")
                if res.status != 0:
                    raise ValueError("polytope is unbounded; no bounding box")
                out[j] = sgn * res.fun
        return lo, hi

    def vertices(self, tol=1e-9):
        """Vertex enumeration by n-row active sets (small dimension only)."""
        n = self.dim
        verts = []
        for S in itertools.combinations(range(self.G.shape[0]), n):
            A = self.G[list(S)]
            if abs(np.linalg.det(A)) < 1e-12:
                continue
            v = np.linalg.solve(A, self.h[list(S)])
            if self.contains(v, tol) and not any(np.linalg.norm(v - w) < 1e-9 for w in verts):
                verts.append(v)
        return np.array(verts).reshape(-1, n)

    def halfspaces(self):
        return self.G, self.h

    def __repr__(self):
        return f"Polytope(m={self.G.shape[0]}, n={self.dim})"


class Singleton(ConvexSet):
    """A single point; used for solution sets ``X* = {x*}``."""

    def __init__(self, point):
        self.point = np.asarray(point, dtype=float).reshape(-1)
        self.point.setflags(write=False)
        self.dim = self.point.size

    def project(self, z):
        z = np.asarray(z, dtype=float)
        return np.broadcast_to(self.point, z.shape).copy()

    def contains(self, z, tol=1e-10):
        return bool(np.linalg.norm(np.asarray(z, dtype=float) - self.point) <= tol)

    def active_normals(self, x, tol=ACTIVE_TOL):
        eye = np.eye(self.dim)
        return np.vstack([eye, -eye])

    def bounding_box(self):
        return self.point.copy(), self.point.copy()

    def vertices(self):
        return self.point.reshape(1, -1).copy()

    def halfspaces(self):
        eye = np.eye(self.dim)
        return np.vstack([eye, -eye]), np.concatenate([self.point, -self.point])

    def __repr__(self):
        return f"Singleton({self.point.tolist()})"


def project(S, z):
    """Euclidean projection of ``z`` onto the set ``S``."""
    return S.project(z)


def distance(S, z):
    """``||z - P_S(z)||``."""
    return S.distance(z)


def tangent_cone(S, x, tol=ACTIVE_TOL):
    """``T_S(x) = {z : g_j . z <= 0 for active constraints j}``."""
    x = np.asarray(x, dtype=float)
    S._check_member(x, tol)
    return PolyhedralCone(S.dim, halfspaces=S.active_normals(x, tol))


def normal_cone(S, x, tol=ACTIVE_TOL):
    """``N_S(x)``: the polar of the tangent cone, generated by active normals."""
    x = np.asarray(x, dtype=float)
    S._check_member(x, tol)
    return PolyhedralCone(S.dim, generators=S.active_normals(x, tol))
