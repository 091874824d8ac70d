"""Acceptance criteria 1-10.

Each test records one ``C<k> PASS|FAIL ...`` line; the lines are printed in
the pytest terminal summary and by ``python3 tests/test_acceptance.py``.
"""

import math
import sys

import numpy as np
import pytest

from gnepsharp.cli import main as cli_main
from gnepsharp.diagnostics import check_error_bound, check_linear_conditioning, diagnose, gamma_from_cones
from gnepsharp.fixtures import load_fixture
from gnepsharp.instances import generate_instance, parse_instance
from gnepsharp.nikaido import RegularizedEvaluator, gap_Va, grad_Va, psi_convexity_in_x, reg_psi_a
from gnepsharp.oracle import grid_min_psi_a_against, grid_phi_residual, grid_points, grid_scan_nne, grid_V
from gnepsharp.ppa import PPAConfig, fejer_check, iteration_bound, ppa_run
from gnepsharp.vi import solve_vi_extragradient, vi_residual

RESULTS = {}


def record(key, ok, detail):
    line = f"{key} {'PASS' if ok else 'FAIL'}: {detail}"
    RESULTS[key] = line
    print(line)
    return ok


def generated(count, seed0, floors=(0.5, 0.1)):
    out = []
    for s in range(count):
        data = generate_instance(2 + s % 2, 1, seed0 + s, floors[s % len(floors)])
        out.append(parse_instance(data, name=f"gen-{seed0 + s}"))
    return out


def sample(S, m, rng):
    lo, hi = S.bounding_box()
    return S.project(rng.uniform(lo, hi, size=(m, S.dim)))


def grid_for(S):
    return 81 if S.dim == 2 else 31


def test_c1_gap_axioms():
    rng = np.random.default_rng(1)
    worst_neg, worst_sol, mismatches, n_pts = math.inf, 0.0, 0, 0
    for inst in generated(50, 0):
        S, g = inst.feasible, inst.game
        ev = RegularizedEvaluator(g, g.delta / 2)
        X = sample(S, 100, rng)
        V = gap_Va(ev, S, X)
        worst_neg = min(worst_neg, float(V.min()))
        sols = [solve_vi_extragradient(g, S, x0) for x0 in (S.lower, S.upper, X[0])]
        for s in sols:
            assert s.converged
            worst_sol = max(worst_sol, gap_Va(ev, S, s.x))
        for x in np.vstack([X, [s.x for s in sols]]):
            n_pts += 1
            if (vi_residual(g, S, x) <= 1e-8) != (gap_Va(ev, S, x) <= 1e-6):
                mismatches += 1
    ok = worst_neg >= -1e-10 and worst_sol <= 1e-8 and mismatches == 0
    assert record("C1", ok, f"min V_a over 5000 points {worst_neg:.3g} (>= -1e-10); max V_a at 150 EG "
                            f"solutions {worst_sol:.3g} (<= 1e-8); certificate mismatches {mismatches}/{n_pts}")


def test_c2_gradient_formula():
    rng = np.random.default_rng(2)
    h, worst = 1e-5, 0.0
    for inst in generated(10, 200):
        S = inst.feasible
        ev = RegularizedEvaluator(inst.game, inst.game.delta / 2)
        for x in sample(S, 20, rng):
            g = grad_Va(ev, S, x)
            fd = np.array([(gap_Va(ev, S, x + h * e) - gap_Va(ev, S, x - h * e)) / (2 * h) for e in np.eye(S.dim)])
            worst = max(worst, float(np.linalg.norm(g - fd) / max(1.0, np.linalg.norm(g))))
    assert record("C2", worst <= 1e-5, f"max relative error grad_Va vs central differences {worst:.3g} "
                                      f"(<= 1e-5, 200 points)")


def test_c3_lemma_psi_a_against_solution():
    cases = [(f.instance, f.instance.defaults["a"]) for f in map(load_fixture, ("E1", "E0"))]
    cases += [(inst, inst.game.delta / 2) for inst in generated(10, 300)]
    cases += [(inst, inst.game.delta) for inst in generated(4, 320)]
    worst = math.inf
    for inst, a in cases:
        ev = RegularizedEvaluator(inst.game, a)
        assert psi_convexity_in_x(ev)
        worst = min(worst, grid_min_psi_a_against(ev, inst.feasible, inst.solution_set.point, grid_for(inst.feasible)))
    # informative only: outside the hypothesis the inequality may fail
    inst = load_fixture("E0").instance
    viol = grid_min_psi_a_against(RegularizedEvaluator(inst.game, 2.0), inst.feasible, [0.0, 0.0], 41)
    assert record("C3", worst >= -1e-8, f"min grid psi_a(x, x*) over {len(cases)} instances with a <= delta "
                                        f"{worst:.3g} (>= -1e-8); E0 with a=2 > delta gives {viol:.3g} (reported)")


def _sampled_convex(ev, y, x, rng, t=0.1, n_dirs=4000):
    D = rng.normal(size=(n_dirs, x.size))
    D /= np.linalg.norm(D, axis=1, keepdims=True)
    second = (reg_psi_a(ev, x + t * D, y) + reg_psi_a(ev, x - t * D, y) - 2 * reg_psi_a(ev, x, y)) / t ** 2
    return bool(second.min() >= -1e-8)


def test_c4_convexity_threshold():
    rng = np.random.default_rng(4)
    agree = total = 0
    for inst in generated(20, 400):
        d = inst.game.delta
        for a in (0.25 * d, 0.5 * d, 0.9 * d, d, d + 0.05, d + 0.3, 2 * d + 1.0):
            ev = RegularizedEvaluator(inst.game, a)
            flag = psi_convexity_in_x(ev)
            x, y = sample(inst.feasible, 2, rng)
            total += 1
            agree += (flag == (a <= d + 1e-10)) and (flag == _sampled_convex(ev, y, x, rng))
    assert record("C4", agree == total, f"convexity flag agrees with a <= delta + 1e-10 and sampled second "
                                       f"differences on {agree}/{total} (instance, a) pairs")


def test_c5_error_bound_e1_e0():
    e1, e0 = load_fixture("E1").instance, load_fixture("E0").instance
    g = gamma_from_cones(e1.game, e1.feasible, e1.solution_set)
    ev1 = RegularizedEvaluator(e1.game, 0.5)
    eb = check_error_bound(ev1, e1.feasible, e1.solution_set, 41)
    lc = check_linear_conditioning(ev1, e1.feasible, e1.solution_set, 41)
    ev0 = RegularizedEvaluator(e0.game, 0.5)
    c, f = (check_error_bound(ev0, e0.feasible, e0.solution_set, n) for n in (21, 81))
    ok = abs(g - 1.25) <= 1e-8 and eb >= 1.20 and c >= 2 * f
    assert record("C5", ok, f"E1 gamma_cone {g!r} (1.25 +/- 1e-8); E1 41x41 min V_a/d {eb:.4f} (>= 1.20), "
                            f"lincond {lc:.4f}; E0 min V_a/d {c:.4g} -> {f:.4g} (factor {c / f:.2f} >= 2)")


def test_c6_equivalence_suite():
    verdicts = []
    for kind, want in (("sharp", "PASS-sharp"), ("degenerate", "PASS-degenerate")):
        for k in range(5):
            inst = load_fixture(f"random-{kind}-{k}").instance
            ev = RegularizedEvaluator(inst.game, inst.defaults["a"])
            rep = diagnose(ev, inst.feasible, inst.solution_set, instance_id=f"random-{kind}-{k}")
            verdicts.append((rep.verdicts["equivalence"], want))
    e1 = load_fixture("E1").instance
    na = diagnose(RegularizedEvaluator(e1.game, 0.6), e1.feasible, e1.solution_set).verdicts["equivalence"]
    s0 = load_fixture("random-sharp-0").instance
    na2 = diagnose(RegularizedEvaluator(s0.game, s0.game.delta * 1.5), s0.feasible,
                   s0.solution_set).verdicts["equivalence"]
    good = sum(v == w for v, w in verdicts)
    ok = good == 10 and na == "NOT-APPLICABLE" and na2 == "NOT-APPLICABLE"
    assert record("C6", ok, f"{good}/10 constructed instances PASS with the expected sign; "
                            f"a > delta gives {na} (E1) and {na2} (random-sharp-0)")


def test_c7_ppa_finite_termination():
    inst = load_fixture("E1").instance
    ev = RegularizedEvaluator(inst.game, 0.5)
    cfg = PPAConfig(a=0.5, r=1.0, epsilon=1.1)
    trace = ppa_run(ev, inst.feasible, [2.0, 2.0], cfg, xstar=inst.solution_set)
    k0 = trace.termination_index
    bound = iteration_bound(math.sqrt(2), 1.1, 1.25)
    fej = fejer_check(trace, [1.0, 1.0])
    ok = (k0 is not None and trace.gap[k0] <= 1e-7 and trace.xstar_distance[k0] <= 1e-6 and fej.ok
          and k0 <= bound and abs(bound - 1.5488) < 5e-5)
    assert record("C7", ok, f"k0 = {k0}, gap_Va(x_k0) = {trace.gap[k0]:.3g}, d(x_k0, X*) = "
                            f"{trace.xstar_distance[k0]:.3g}, Fejer ok = {fej.ok}, bound = {bound:.4f}")


def test_c8_subproblem_certificates():
    runs = []
    for name, x0 in (("E1", [2.0, 2.0]), ("E0", [1.0, 1.0]), ("random-sharp-3", None), ("random-degenerate-0", None)):
        inst = load_fixture(name).instance
        a = inst.defaults["a"]
        ev = RegularizedEvaluator(inst.game, a)
        x0 = inst.feasible.upper if x0 is None else x0
        trace = ppa_run(ev, inst.feasible, x0, PPAConfig(a=a, r=1.0, max_iters=60))
        runs.append((inst, ev, trace))
    steps, worst_margin = 0, -math.inf
    corrupted = math.inf
    for inst, ev, trace in runs:
        S, grid = inst.feasible, grid_for(inst.feasible)
        for k in range(len(trace.iterates) - 1):
            x_k, u = trace.iterates[k], trace.iterates[k + 1]
            r_k = trace.config.r_at(k)
            est = grid_phi_residual(ev, S, u, x_k, r_k, grid)
            worst_margin = max(worst_margin, est.value - (trace.config.tol_sub + est.error))
            steps += 1
            bad = S.project(u + 0.1)
            if np.array_equal(bad, u):
                bad = S.project(u - 0.1)
            corrupted = min(corrupted, grid_phi_residual(ev, S, bad, x_k, r_k, grid).value)
    ok = worst_margin <= 0 and corrupted > 1e-3
    assert record("C8", ok, f"{steps} accepted steps: max(grid Phi - tol_sub - grid error) = {worst_margin:.3g} "
                            f"(<= 0); smallest corrupted-u grid Phi {corrupted:.3g} (> 1e-3)")


def test_c9_oracle_agreement():
    rng = np.random.default_rng(9)
    missing, worst = 0, -math.inf
    for name in ("E1", "E0"):
        inst = load_fixture(name).instance
        S = inst.feasible
        cells = grid_scan_nne(inst.game, S, 41)
        _, cell = grid_points(S, 41)
        for p in inst.solution_set.vertices():
            if np.min(np.linalg.norm(cells - p, axis=1)) > cell:
                missing += 1
        ev = RegularizedEvaluator(inst.game, inst.defaults["a"])
        for x in np.vstack([sample(S, 20, rng), inst.solution_set.point[None]]):
            est = grid_V(inst.game, S, x, 101)
            worst = max(worst, gap_Va(ev, S, x) - est.error - est.value)
    ok = missing == 0 and worst <= 0
    assert record("C9", ok, f"certified NNEs outside the scanned cells: {missing}; max(gap_Va - grid error - "
                            f"grid_V) = {worst:.3g} (<= 0) over 42 points")


def test_c10_determinism(tmp_path, capsys):
    gen = []
    for run in range(2):
        p = tmp_path / f"gen{run}.json"
        cli_main(["generate", "--players", "3", "--dim", "1", "--seed", "11", "--delta-floor", "0.5", "--out", str(p)])
        gen.append(p.read_bytes())
    traces = []
    for run in range(2):
        out = tmp_path / f"run{run}"
        for inst in ("E1", str(tmp_path / "gen0.json")):
            cli_main(["solve", "--instance", inst, "--out", str(out)])
        cli_main(["solve", "--instance", "E1", "--method", "extragradient", "--out", str(out / "eg")])
        traces.append([(out / "E1.trace.csv").read_bytes(), (out / "gen0.trace.csv").read_bytes(),
                       (out / "eg" / "E1.trace.csv").read_bytes()])
    capsys.readouterr()
    ok = gen[0] == gen[1] and traces[0] == traces[1]
    assert record("C10", ok, f"generate bytes identical: {gen[0] == gen[1]}; solve traces identical: "
                             f"{traces[0] == traces[1]} (3 traces)")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
