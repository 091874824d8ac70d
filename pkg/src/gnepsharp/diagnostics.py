"""Weak sharpness, error bound and linear conditioning diagnostics.

Three indicators are computed for a solution set ``X*``:

* ``gamma_cone`` -- ``min <F(x*), z>`` over unit ``z`` in
  ``T_X(x*) & N_{X*}(x*)``, taken over the evaluation points of ``X*``
  (the point itself, or the vertices of a polytopal ``X*``);
* ``gamma_grid_errorbound`` -- grid minimum of ``V_a(x) / d(x, X*)``;
* ``gamma_grid_lincond`` -- grid minimum of ``psi_a(x, P_{X*}(x)) / d(x, X*)``.

Only signs are decidable numerically, so verdicts combine positivity at a
fixed grid with the trend under grid refinement.
"""

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .geometry import EXACT_CONE_DIM, Singleton, min_linear_over_unit_cone, normal_cone, tangent_cone
from .model import QuadraticGame
from .nikaido import gap_Va, psi_convexity_in_x, reg_psi_a
from .oracle import grid_points
from .vi import multistart_solution, vi_residual

EXCLUSION_RADIUS = 1e-6
POSITIVE_TOL = 1e-8
CERTIFY_TOL = 1e-6
COLLAPSE_FACTOR = 2.0


class UncertifiedSolutionSetError(ValueError):
    pass


def evaluation_points(Xstar):
    return np.asarray(Xstar.vertices(), dtype=float).reshape(-1, Xstar.dim)


def certify_solution_set(game, S, Xstar, tol=CERTIFY_TOL):
    """Raise unless every evaluation point of ``X*`` has VI residual <= ``tol``."""
    pts = evaluation_points(Xstar)
    for p in pts:
        if not S.contains(p, 1e-8):
            raise UncertifiedSolutionSetError(f"solution point {p.tolist()} lies outside the feasible set")
        r = vi_residual(game, S, p)
        if r > tol:
            raise UncertifiedSolutionSetError(f"solution point {p.tolist()} has VI residual {r:.3g} > {tol:g}")
    return pts


def gamma_from_cones(game, S, Xstar):
    """Best weak-sharpness modulus certified by the cone criterion at the points of ``X*``.

    Positive means sharp at those points; ``+inf`` means every cone
    ``T_X(x*) & N_{X*}(x*)`` is ``{0}`` (criterion vacuous).
    """
    pts = certify_solution_set(game, S, Xstar)
    best = math.inf
    for p in pts:
        K = tangent_cone(S, p).intersect(normal_cone(Xstar, p))
        best = min(best, min_linear_over_unit_cone(game.F(p), K))
    return best


def _points(S, grid):
    if isinstance(grid, np.ndarray) and grid.ndim == 2:
        return grid, 0.0
    return grid_points(S, grid)


def errorbound_ratios(ev, S, Xstar, pts):
    """``V_a(x) / d(x, X*)`` at the points farther than the exclusion radius."""
    d = np.asarray(Xstar.distance(pts), dtype=float)
    keep = d > EXCLUSION_RADIUS
    if not keep.any():
        return np.zeros(0), keep
    return np.asarray(gap_Va(ev, S, pts[keep]), dtype=float).reshape(-1) / d[keep], keep


def lincond_ratios(ev, S, Xstar, pts):
    """``psi_a(x, P_{X*}(x)) / d(x, X*)`` at the points farther than the exclusion radius."""
    d = np.asarray(Xstar.distance(pts), dtype=float)
    keep = d > EXCLUSION_RADIUS
    if not keep.any():
        return np.zeros(0), keep
    P = Xstar.project(pts[keep])
    return np.asarray(reg_psi_a(ev, pts[keep], P), dtype=float).reshape(-1) / d[keep], keep


def check_error_bound(ev, S, Xstar, grid):
    """Grid minimum of ``V_a(x)/d(x, X*)``; ``+inf`` when no grid point lies off ``X*``."""
    r, _ = errorbound_ratios(ev, S, Xstar, _points(S, grid)[0])
    return float(r.min()) if r.size else math.inf


def check_linear_conditioning(ev, S, Xstar, grid):
    """Grid minimum of ``psi_a(x, P_{X*}(x))/d(x, X*)``; ``+inf`` when vacuous."""
    r, _ = lincond_ratios(ev, S, Xstar, _points(S, grid)[0])
    return float(r.min()) if r.size else math.inf


def classify_cone(gamma):
    if math.isinf(gamma) and gamma > 0:
        return "vacuous"
    return "positive" if gamma > POSITIVE_TOL else "degenerate"


def classify_grid(value, coarse, fine):
    """Positive if bounded away from 0 and stable under refinement; degenerate if it collapses."""
    if math.isinf(value) and math.isinf(coarse) and math.isinf(fine):
        return "vacuous"
    if value <= POSITIVE_TOL or fine <= POSITIVE_TOL:
        return "degenerate"
    if fine * COLLAPSE_FACTOR <= coarse:
        return "degenerate"
    return "positive"


@dataclass
class SharpnessReport:
    instance_id: str | None
    a: float
    delta: float | None
    convexity_prerequisite: bool | None
    gamma_cone: float
    cone_exact: bool
    gamma_grid_errorbound: float
    gamma_grid_lincond: float
    grid_n: int
    grid_cell: float
    refinement: dict
    solution_points: list
    verdicts: dict = field(default_factory=dict)

    @property
    def triple(self):
        return (self.gamma_cone, self.gamma_grid_errorbound, self.gamma_grid_lincond)

    def to_dict(self):
        d = asdict(self)
        d["gamma_cone"] = _render(self.gamma_cone, "vacuous (cone trivial)")
        d["gamma_grid_errorbound"] = _render(self.gamma_grid_errorbound, "vacuous")
        d["gamma_grid_lincond"] = _render(self.gamma_grid_lincond, "vacuous")
        d["refinement"] = {k: ([_render(v, "vacuous") for v in val] if isinstance(val, list) else val)
                           for k, val in self.refinement.items()}
        d["cone_method"] = "exact" if self.cone_exact else "sampled estimate (lower confidence)"
        return d


def _render(v, label):
    return label if isinstance(v, float) and math.isinf(v) else v


def check_equivalence(report):
    """Sign agreement of the three indicators.

    Returns ``"PASS-sharp"``, ``"PASS-degenerate"``, ``"PASS-vacuous"``,
    ``"FAIL"`` or, when ``psi_a(., y)`` is not convex, ``"NOT-APPLICABLE"``.
    """
    if report.convexity_prerequisite is False:
        return "NOT-APPLICABLE"
    ref = report.refinement
    classes = {
        classify_cone(report.gamma_cone),
        classify_grid(report.gamma_grid_errorbound, *ref["errorbound"]),
        classify_grid(report.gamma_grid_lincond, *ref["lincond"]),
    }
    if len(classes) == 1:
        return "PASS-" + {"positive": "sharp", "degenerate": "degenerate", "vacuous": "vacuous"}[classes.pop()]
    return "FAIL"


def resolve_solution_set(game, S, declared=None):
    """The declared ``X*`` or, failing that, a singleton from multi-start extragradient."""
    if declared is not None:
        return declared
    lo, hi = S.bounding_box()
    starts = [S.project(lo), S.project(hi), S.project(0.5 * (lo + hi))]
    return Singleton(multistart_solution(game, S, starts))


def diagnose(ev, S, Xstar, grid_n=41, refine=(21, 81), instance_id=None):
    """Compute all three indicators, the refinement trend and the verdicts."""
    game = ev.game
    prereq = psi_convexity_in_x(ev) if isinstance(game, QuadraticGame) else None
    gamma_cone = gamma_from_cones(game, S, Xstar)
    pts, cell = grid_points(S, grid_n)
    eb = check_error_bound(ev, S, Xstar, pts)
    lc = check_linear_conditioning(ev, S, Xstar, pts)
    coarse, fine = refine
    refinement = {
        "grids": [int(coarse), int(fine)],
        "errorbound": [check_error_bound(ev, S, Xstar, coarse), check_error_bound(ev, S, Xstar, fine)],
        "lincond": [check_linear_conditioning(ev, S, Xstar, coarse),
                    check_linear_conditioning(ev, S, Xstar, fine)],
    }
    report = SharpnessReport(
        instance_id=instance_id,
        a=float(ev.a),
        delta=float(game.delta) if isinstance(game, QuadraticGame) else None,
        convexity_prerequisite=prereq,
        gamma_cone=float(gamma_cone),
        cone_exact=S.dim <= EXACT_CONE_DIM,
        gamma_grid_errorbound=eb,
        gamma_grid_lincond=lc,
        grid_n=int(grid_n),
        grid_cell=cell,
        refinement=refinement,
        solution_points=evaluation_points(Xstar).tolist(),
    )
    report.verdicts = {
        "weak_sharpness": _holds(classify_cone(gamma_cone)),
        "error_bound": _holds(classify_grid(eb, *refinement["errorbound"])),
        "linear_conditioning": _holds(classify_grid(lc, *refinement["lincond"])),
        "equivalence": check_equivalence(report),
    }
    return report


def _holds(cls):
    return {"positive": "holds", "degenerate": "fails", "vacuous": "vacuous"}[cls]
