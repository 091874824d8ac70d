"""
Regularized gap functions on a two-player game
==============================================

Two players each pick a scalar in [1, 2].  Losses are
theta_i = 0.5 x_i^2 + 0.25 x_j x_i, so the pseudo-gradient is
F(x) = (x_1 + 0.25 x_2, x_2 + 0.25 x_1) and the unique normalized
equilibrium is the lower corner (1, 1).
"""

import numpy as np

from gnepsharp.fixtures import load_fixture
from gnepsharp.nikaido import RegularizedEvaluator, best_response, gap_Va, grad_Va, ni_psi, reg_psi_a
from gnepsharp.vi import vi_residual

inst = load_fixture("E1").instance
game, X = inst.game, inst.feasible
print("C =\n", game.C)
print("delta = lambda_min(C + C^T) =", game.delta)

###############################################################################
# psi and psi_a at a pair of profiles.  With a = 0.5 the regularization
# subtracts 0.25 * ||x - y||^2.

ev = RegularizedEvaluator(game, a=0.5)
x, y = np.array([1.5, 1.5]), np.array([1.0, 1.0])
print("psi(x, y)   =", ni_psi(game, x, y))
print("psi_a(x, y) =", reg_psi_a(ev, x, y))

###############################################################################
# V_a(x) is the max of psi_a(x, .) over X.  For boxes with scalar players the
# inner maximizer is a clipped scalar optimum, so this is exact.

br = best_response(ev, X, x)
print("y^a(1.5, 1.5) =", br.y, " V_a =", gap_Va(ev, X, x))

###############################################################################
# The gap vanishes exactly at the equilibrium, and there its gradient equals F.

for p in ([1.0, 1.0], [1.2, 1.0], [2.0, 2.0]):
    print(p, "V_a =", round(gap_Va(ev, X, p), 6), " residual =", round(vi_residual(game, X, p), 6))
print("grad V_a(1, 1) =", grad_Va(ev, X, [1.0, 1.0]), " F(1, 1) =", game.F([1.0, 1.0]))

###############################################################################
# A plot-ready table of V_a over the box (columns x_1, x_2, V_a).

g = np.linspace(1, 2, 6)
for x1 in g:
    print(" ".join(f"{gap_Va(ev, X, [x1, x2]):7.4f}" for x2 in g))
