"""
Sign agreement on constructed instances
=======================================

Five instances with a solution at a box vertex where F points strictly
into the box (sharp), and five with an interior solution where F = 0
(degenerate).  The three indicators must agree in sign.
"""

from gnepsharp.diagnostics import diagnose
from gnepsharp.fixtures import load_fixture
from gnepsharp.nikaido import RegularizedEvaluator

print(f"{'instance':22s} {'delta':>7s} {'cone':>8s} {'errbound':>9s} {'lincond':>9s}  verdict")
for kind in ("sharp", "degenerate"):
    for k in range(5):
        name = f"random-{kind}-{k}"
        inst = load_fixture(name).instance
        rep = diagnose(RegularizedEvaluator(inst.game, inst.defaults["a"]), inst.feasible, inst.solution_set)
        c, e, l = rep.triple
        print(f"{name:22s} {rep.delta:7.3f} {c:8.4f} {e:9.4f} {l:9.4f}  {rep.verdicts['equivalence']}")
