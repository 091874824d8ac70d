"""Proximal point algorithm on the regularized NI function.

Each step finds ``x_{k+1} = u`` in ``X`` with

    psi_a(u, z) - (1/r_k) <z - u, u - x_k> <= 0   for every z in X,

certified by the residual ``Phi_k(u)``, the maximum of the left-hand side
over ``z``.  ``Phi_k(u) >= 0`` always (take ``z = u``).
"""

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .model import QuadraticGame
from .nikaido import ConvergenceError, gap_Va, psi_convexity_in_x, reg_psi_a, regularized_argmax
from .vi import vi_residual


@dataclass
class PPAConfig:
    """Run parameters.

    ``r`` is a constant or a listed schedule (the last entry persists).
    ``epsilon`` must exceed ``sup_k 1/r_k``; when omitted it is recorded as
    ``sup_k 1/r_k * (1 + 1e-12)``.
    """

    a: float
    r: float | Sequence[float] = 1.0
    epsilon: float | None = None
    tol_sub: float = 1e-9
    tol_term: float = 1e-7
    max_iters: int = 1000
    sub_max_iters: int = 10_000

    def __post_init__(self):
        sched = self.schedule
        if len(sched) == 0 or min(sched) <= 0:
            raise ValueError("every r_k must be positive")
        sup_inv = 1.0 / min(sched)
        if self.epsilon is None:
            self.epsilon = sup_inv * (1 + 1e-12)
        elif not self.epsilon > sup_inv:
            raise ValueError(f"epsilon={self.epsilon} must exceed sup 1/r_k = {sup_inv}")

    @property
    def schedule(self):
        return [float(v) for v in np.atleast_1d(self.r)]

    def r_at(self, k):
        sched = self.schedule
        return sched[min(k, len(sched) - 1)]


@dataclass
class SubproblemResult:
    u: np.ndarray
    residual: float
    iterations: int
    converged: bool
    method: str


@dataclass
class PPATrace:
    iterates: np.ndarray
    gap: np.ndarray
    vi_residual: np.ndarray
    step_norm: np.ndarray       # ||x_{k+1} - x_k||, NaN on the last row
    sub_residual: np.ndarray    # Phi_k(x_{k+1}), NaN on the last row
    termination_index: int | None
    config: PPAConfig
    convexity_prerequisite: bool | None
    xstar_distance: np.ndarray | None = None
    notes: list = field(default_factory=list)

    @property
    def terminated(self):
        return self.termination_index is not None

    @property
    def xstar_check_ok(self):
        """Declared-X* cross-check of the termination point (``d <= 10 tol_term``)."""
        if self.xstar_distance is None or self.termination_index is None:
            return None
        return bool(self.xstar_distance[self.termination_index] <= 10 * self.config.tol_term)

    def to_csv(self, fh=None):
        n = self.iterates.shape[1]
        buf = fh if fh is not None else io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k"] + [f"x_{j + 1}" for j in range(n)]
                   + ["gap_Va", "vi_residual", "step_norm", "sub_residual"])
        for k, x in enumerate(self.iterates):
            w.writerow([k] + [_fmt(v) for v in x]
                       + [_fmt(self.gap[k]), _fmt(self.vi_residual[k]),
                          _fmt(self.step_norm[k]), _fmt(self.sub_residual[k])])
        return buf.getvalue() if fh is None else None

    def summary(self):
        k0 = self.termination_index
        return {
            "iterations": int(len(self.iterates) - 1),
            "termination_index": k0,
            "terminated": self.terminated,
            "final_point": self.iterates[-1].tolist(),
            "final_gap_Va": float(self.gap[-1]),
            "final_vi_residual": float(self.vi_residual[-1]),
            "max_sub_residual": _nanmax(self.sub_residual),
            "epsilon": float(self.config.epsilon),
            "convexity_prerequisite": self.convexity_prerequisite,
            "xstar_check_ok": self.xstar_check_ok,
            "notes": list(self.notes),
        }


def _fmt(v):
    v = float(v)
    return "" if math.isnan(v) else repr(v)


def _nanmax(a):
    a = np.asarray(a, dtype=float)
    a = a[~np.isnan(a)]
    return float(a.max()) if a.size else None


def phi_residual(ev, S, u, x_k, r_k):
    """``Phi_k(u) = max_z psi_a(u, z) - (1/r_k) <z - u, u - x_k>`` and its maximizer."""
    u = np.asarray(u, dtype=float)
    x_k = np.asarray(x_k, dtype=float)
    lin = (u - x_k) / r_k
    z = regularized_argmax(ev, S, u, linear=lin).y
    val = float(reg_psi_a(ev, u, z) - lin @ (z - u))
    return max(val, 0.0), z


def ppa_subproblem(ev, S, x_k, r_k, tol_sub=1e-9, max_iters=10_000):
    """Solve one proximal step to residual ``Phi_k(u) <= tol_sub``.

    Damped fixed point ``u <- (1 - tau) u + tau T(u)`` with
    ``T(u) = argmax_z psi_a(u, z) - 1/(2 r_k) ||z - x_k||^2``; ``tau`` is
    halved whenever the residual grows.  If that stalls, the equivalent
    strongly monotone VI ``F(u) + (u - x_k)/r_k`` is solved by extragradient.
    Acceptance rests only on the ``Phi_k`` certificate.
    """
    x_k = np.asarray(x_k, dtype=float)
    u = x_k.copy()
    phi, _ = phi_residual(ev, S, u, x_k, r_k)
    tau = 1.0
    stall = 0
    it = 0
    while phi > tol_sub and it < max_iters:
        it += 1
        Tu = regularized_argmax(ev, S, u, weight=1.0 / r_k, anchor=x_k).y
        cand = (1.0 - tau) * u + tau * Tu
        phi_c, _ = phi_residual(ev, S, cand, x_k, r_k)
        if phi_c > phi and tau > 1e-6:
            tau *= 0.5
            stall += 1
            if stall > 40:
                break
            continue
        stall = stall + 1 if phi_c > 0.999 * phi else 0
        u, phi = cand, phi_c
        if stall > 40:
            break
    if phi <= tol_sub:
        return SubproblemResult(u, phi, it, True, "fixed-point")
    return _subproblem_extragradient(ev, S, x_k, r_k, tol_sub, max_iters, u, phi)


def _subproblem_extragradient(ev, S, x_k, r_k, tol_sub, max_iters, u, phi):
    game = ev.game

    def G(v):
        return game.F(v) + (v - x_k) / r_k

    if isinstance(game, QuadraticGame):
        L = game.lipschitz_F() + 1.0 / r_k
    else:
        L = 10.0 + 1.0 / r_k
    t = 0.9 / L
    best_u, best_phi = u, phi
    for it in range(1, 50 * max_iters + 1):
        v = S.project(u - t * G(u))
        u = S.project(u - t * G(v))
        if it % 10 == 0:
            phi, _ = phi_residual(ev, S, u, x_k, r_k)
            if phi < best_phi:
                best_u, best_phi = u, phi
            if phi <= tol_sub:
                return SubproblemResult(u, phi, it, True, "extragradient")
    return SubproblemResult(best_u, best_phi, it, False, "extragradient")


def ppa_run(ev, S, x0, config, xstar=None):
    """Run the proximal point algorithm until ``gap_Va(x_k) <= tol_term`` or the cap.

    Finite termination is detected through the gap certificate; ``xstar``
    (a declared solution set) only adds a distance cross-check.
    """
    x = np.asarray(x0, dtype=float)
    S._check_member(x)
    prereq = psi_convexity_in_x(ev) if isinstance(ev.game, QuadraticGame) else None
    notes = []
    if prereq is False:
        notes.append(f"a={ev.a} exceeds delta={ev.game.delta}: psi_a(., y) is not convex")
    iterates = [x.copy()]
    gaps = [gap_Va(ev, S, x)]
    ress = [vi_residual(ev.game, S, x)]
    steps, subs = [], []
    k = 0
    while gaps[-1] > config.tol_term and k < config.max_iters:
        sub = ppa_subproblem(ev, S, x, config.r_at(k), config.tol_sub, config.sub_max_iters)
        if not sub.converged:
            notes.append(f"subproblem {k} stopped at residual {sub.residual:.3g}")
            break
        x_new = sub.u
        steps.append(float(np.linalg.norm(x_new - x)))
        subs.append(sub.residual)
        x = x_new
        iterates.append(x.copy())
        gaps.append(gap_Va(ev, S, x))
        ress.append(vi_residual(ev.game, S, x))
        k += 1
    steps.append(math.nan)
    subs.append(math.nan)
    term = k if gaps[-1] <= config.tol_term else None
    iterates = np.array(iterates)
    dist = None
    if xstar is not None:
        dist = np.asarray(xstar.distance(iterates), dtype=float)
    return PPATrace(iterates, np.array(gaps), np.array(ress), np.array(steps), np.array(subs),
                    term, config, prereq, dist, notes)


def iteration_bound(d0, epsilon, gamma):
    """Finite-termination bound ``d0^2 epsilon^2 / gamma^2`` on the index ``k0``."""
    if not gamma > 0:
        raise ValueError("gamma must be positive: the solution set is not weakly sharp, bound undefined")
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    return float(d0) ** 2 * float(epsilon) ** 2 / float(gamma) ** 2


@dataclass
class FejerReport:
    ok: bool
    violations: list
    margins: np.ndarray
    prerequisite: bool | None


def fejer_check(trace, x_star, slack=1e-6):
    """Check ``||x_{k+1}-x_k||^2 <= ||x*-x_k||^2 - ||x*-x_{k+1}||^2`` up to ``slack``.

    Violations are reported, never raised; ``prerequisite`` echoes the
    convexity flag of the run so a broken assumption is visible.
    """
    x_star = np.asarray(x_star, dtype=float)
    X = trace.iterates
    margins = []
    for k in range(len(X) - 1):
        lhs = np.sum((X[k + 1] - X[k]) ** 2)
        rhs = np.sum((x_star - X[k]) ** 2) - np.sum((x_star - X[k + 1]) ** 2)
        margins.append(rhs - lhs)
    margins = np.array(margins)
    violations = [int(k) for k in np.flatnonzero(margins < -slack)]
    return FejerReport(not violations, violations, margins, trace.convexity_prerequisite)


def trace_from_csv(text):
    """Parse a trace CSV back into columns (used by the bound command)."""
    rows = list(csv.DictReader(io.StringIO(text)))
    def col(name):
        return np.array([float(r[name]) if r[name] != "" else math.nan for r in rows])
    xcols = [c for c in rows[0] if c.startswith("x_")] if rows else []
    return {
        "k": col("k").astype(int) if rows else np.zeros(0, dtype=int),
        "x": np.column_stack([col(c) for c in xcols]) if rows else np.zeros((0, 0)),
        "gap_Va": col("gap_Va") if rows else np.zeros(0),
        "vi_residual": col("vi_residual") if rows else np.zeros(0),
    }


def measured_termination_index(gaps, tol_term):
    """First k such that every gap from k on is at most ``tol_term``; None if the last one is not."""
    gaps = np.asarray(gaps, dtype=float)
    if gaps.size == 0 or gaps[-1] > tol_term:
        return None
    k = gaps.size - 1
    while k > 0 and gaps[k - 1] <= tol_term:
        k -= 1
    return int(k)
