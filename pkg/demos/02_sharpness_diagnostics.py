"""
Weak sharpness, error bounds and linear conditioning
====================================================

The same matrices on two boxes.  On [1, 2]^2 the solution (1, 1) sits in a
corner with F(x*) = (1.25, 1.25) pointing into the box, so V_a grows
linearly away from it.  On [0, 1]^2 the solution is the origin where
F(0) = 0 and V_a only grows quadratically.
"""

from gnepsharp.diagnostics import check_error_bound, diagnose
from gnepsharp.fixtures import load_fixture
from gnepsharp.geometry import min_linear_over_unit_cone, normal_cone, tangent_cone
from gnepsharp.nikaido import RegularizedEvaluator

e1 = load_fixture("E1").instance
e0 = load_fixture("E0").instance

###############################################################################
# Cone criterion: min <F(x*), z> over unit z in T_X(x*) & N_X*(x*).

T = tangent_cone(e1.feasible, [1.0, 1.0])
K = T.intersect(normal_cone(e1.solution_set, [1.0, 1.0]))
print("extreme rays of T_X(1,1):", T.rays.tolist())
print("gamma_cone on E1:", min_linear_over_unit_cone(e1.game.F([1.0, 1.0]), K))

###############################################################################
# Grid ratios V_a(x) / d(x, X*) as the grid is refined.  On E1 the minimum
# settles near 1.25; on E0 it keeps shrinking with the cell size.

for name, inst in (("E1", e1), ("E0", e0)):
    ev = RegularizedEvaluator(inst.game, 0.5)
    mins = [check_error_bound(ev, inst.feasible, inst.solution_set, n) for n in (11, 21, 41, 81)]
    print(name, " ".join(f"{m:.4f}" for m in mins))

###############################################################################
# The full report and its verdicts.  With a above delta the convexity that
# the equivalence relies on is gone, so the verdict is NOT-APPLICABLE.

for name, inst, a in (("E1", e1, 0.5), ("E0", e0, 0.5), ("E1", e1, 0.6)):
    rep = diagnose(RegularizedEvaluator(inst.game, a), inst.feasible, inst.solution_set)
    print(f"{name} a={a}: triple={tuple(round(v, 4) for v in rep.triple)} verdicts={rep.verdicts}")
