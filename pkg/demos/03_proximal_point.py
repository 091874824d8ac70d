"""
Finite termination of the proximal point method
===============================================

On the weakly sharp instance the proximal point method lands on the
solution after finitely many steps; the number of steps is bounded by
d(x0, X*)^2 eps^2 / gamma^2.  On the degenerate instance it only converges
asymptotically.
"""

import math

from gnepsharp.fixtures import load_fixture
from gnepsharp.nikaido import RegularizedEvaluator
from gnepsharp.ppa import PPAConfig, fejer_check, iteration_bound, ppa_run

e1 = load_fixture("E1").instance
ev = RegularizedEvaluator(e1.game, 0.5)
cfg = PPAConfig(a=0.5, r=1.0, epsilon=1.1)
trace = ppa_run(ev, e1.feasible, [2.0, 2.0], cfg, xstar=e1.solution_set)
print(trace.to_csv())
print("k0 =", trace.termination_index, " bound =", round(iteration_bound(math.sqrt(2), 1.1, 1.25), 4))
print("Fejer:", fejer_check(trace, [1.0, 1.0]).ok)

###############################################################################
# E0: F vanishes at the solution, so there is no sharpness and the run needs
# many steps, each shrinking the distance by a constant factor.

e0 = load_fixture("E0").instance
t0 = ppa_run(RegularizedEvaluator(e0.game, 0.5), e0.feasible, [1.0, 1.0], PPAConfig(a=0.5), xstar=e0.solution_set)
print("E0 terminated at k0 =", t0.termination_index)
for k in range(0, len(t0.iterates), 4):
    print(k, t0.iterates[k].round(6).tolist(), f"{t0.gap[k]:.3e}")
