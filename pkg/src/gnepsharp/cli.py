"""Command-line front end.

    gnepsharp generate --players 2 --dim 1 --seed 7 --delta-floor 0.5 --out inst.json
    gnepsharp solve    --instance E1.json --method ppa --a 0.5 --r 1 --x0 2,2 --out runs/
    gnepsharp diagnose --instance E1.json --a 0.5 --grid 41
    gnepsharp bound    --instance E1.json --x0 2,2 --r 1 --epsilon 1.1 [--trace runs/E1.trace.csv]
    gnepsharp verify   --instance E1.json

``--instance`` takes a path or the name of a bundled fixture (``E1``,
``E0``, ``random-sharp-3`` ...) and may be repeated; ``--jobs`` runs the
instances in parallel processes.  Exit codes: 0 success, 1 input error,
2 iteration cap, 3 precondition absent.
"""

import argparse
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .diagnostics import UncertifiedSolutionSetError, diagnose, gamma_from_cones, resolve_solution_set
from .fixtures import NAMES as FIXTURE_NAMES
from .fixtures import FixtureValidationError, fixture_paths, load_fixture
from .geometry import InfeasibleSetError, NotInSetError
from .instances import InstanceError, dumps, generate_instance, load_instance
from .model import GameError
from .nikaido import ConvergenceError, RegularizedEvaluator, gap_Va
from .ppa import PPAConfig, iteration_bound, measured_termination_index, ppa_run, trace_from_csv
from .vi import solve_vi_extragradient, vi_residual

EXIT_OK, EXIT_INPUT, EXIT_CAP, EXIT_PRECONDITION = 0, 1, 2, 3
INPUT_ERRORS = (InstanceError, GameError, NotInSetError, InfeasibleSetError, ValueError,
                FileNotFoundError, IsADirectoryError)


class CommandError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _instance_path(source):
    p = Path(source)
    if not p.exists() and source in FIXTURE_NAMES:
        return fixture_paths(source)[0]
    return p


def _open_instance(source):
    return load_instance(_instance_path(source))


def _default_a(inst, args):
    if args.a is not None:
        return float(args.a)
    if "a" in inst.defaults:
        return float(inst.defaults["a"])
    return max(float(inst.game.delta) / 2, 1e-6)


def _default_x0(inst, args):
    if args.x0 is not None:
        x0 = np.array(args.x0, dtype=float)
    elif "x0" in inst.defaults:
        x0 = np.array(inst.defaults["x0"], dtype=float)
    else:
        return inst.feasible.project(inst.feasible.bounding_box()[1])
    if x0.shape != (inst.game.n,):
        raise ValueError(f"x0 has {x0.size} entries, instance has dimension {inst.game.n}")
    return x0


def _ppa_config(inst, args):
    d = inst.defaults
    r = args.r if args.r is not None else d.get("r", 1.0)
    return PPAConfig(
        a=_default_a(inst, args),
        r=r[0] if isinstance(r, list) and len(r) == 1 else r,
        epsilon=args.epsilon if args.epsilon is not None else d.get("epsilon"),
        tol_sub=float(d.get("tol_sub", 1e-9)),
        tol_term=float(args.tol if args.tol is not None else d.get("tol_term", 1e-7)),
        max_iters=int(args.max_iters if args.max_iters is not None else d.get("max_iters", 1000)),
    )


def _config_dict(cfg):
    return {"a": cfg.a, "r": cfg.schedule, "epsilon": cfg.epsilon, "tol_sub": cfg.tol_sub,
            "tol_term": cfg.tol_term, "max_iters": cfg.max_iters}


def _instance_echo(source, inst):
    return {"source": str(source), "name": inst.name, "n_players": inst.game.N, "dims": list(inst.game.dims),
            "delta": float(inst.game.delta), "warnings": list(inst.warnings)}


# ---------------------------------------------------------------------------
# commands; each returns (exit code, outcome, config echo, instance, trace CSV or None)

def cmd_generate(players, dim_per_player, seed, delta_floor):
    """Instance text for ``generate``; identical seeds give identical bytes."""
    return dumps(generate_instance(players, dim_per_player, seed, delta_floor))


def _eg_trace_csv(game, S, ev, history):
    n = game.n
    lines = ["k," + ",".join(f"x_{j + 1}" for j in range(n)) + ",gap_Va,vi_residual,step_norm,sub_residual"]
    H = np.array(history)
    gaps = np.atleast_1d(gap_Va(ev, S, H))
    for k, x in enumerate(H):
        step = repr(float(np.linalg.norm(H[k + 1] - x))) if k + 1 < len(H) else ""
        lines.append(",".join([str(k)] + [repr(float(v)) for v in x]
                              + [repr(float(gaps[k])), repr(float(vi_residual(game, S, x))), step, ""]))
    return "\n".join(lines) + "\n"


def cmd_solve(source, args):
    inst = _open_instance(source)
    x0 = _default_x0(inst, args)
    inst.feasible._check_member(x0)
    if args.method == "ppa":
        cfg = _ppa_config(inst, args)
        ev = RegularizedEvaluator(inst.game, cfg.a)
        trace = ppa_run(ev, inst.feasible, x0, cfg, xstar=inst.solution_set)
        outcome = {"method": "ppa", **trace.summary()}
        code = EXIT_OK if trace.terminated else EXIT_CAP
        return code, outcome, {**_config_dict(cfg), "x0": x0.tolist(), "method": "ppa"}, inst, trace.to_csv()
    tol = float(args.tol if args.tol is not None else 1e-10)
    cap = int(args.max_iters if args.max_iters is not None else 100_000)
    res = solve_vi_extragradient(inst.game, inst.feasible, x0, tol=tol, cap=cap, keep_history=True)
    ev = RegularizedEvaluator(inst.game, _default_a(inst, args))
    outcome = {"method": "extragradient", "iterations": res.iterations, "converged": res.converged,
               "final_point": res.x.tolist(), "final_vi_residual": res.residual, "step": res.step,
               "final_gap_Va": float(gap_Va(ev, inst.feasible, res.x))}
    cfg = {"method": "extragradient", "a": ev.a, "tol": tol, "max_iters": cap, "x0": x0.tolist()}
    csv_text = _eg_trace_csv(inst.game, inst.feasible, ev, res.history)
    return (EXIT_OK if res.converged else EXIT_CAP), outcome, cfg, inst, csv_text


def cmd_diagnose(source, args):
    inst = _open_instance(source)
    a = _default_a(inst, args)
    ev = RegularizedEvaluator(inst.game, a)
    try:
        Xstar = resolve_solution_set(inst.game, inst.feasible, inst.solution_set)
    except RuntimeError as exc:
        raise CommandError(f"no certified solution set: {exc}", EXIT_PRECONDITION) from None
    grid = int(args.grid) if args.grid is not None else 41
    report = diagnose(ev, inst.feasible, Xstar, grid_n=grid, instance_id=inst.name)
    return EXIT_OK, report.to_dict(), {"a": a, "grid": grid}, inst, None


def cmd_bound(source, args):
    inst = _open_instance(source)
    cfg = _ppa_config(inst, args)
    x0 = _default_x0(inst, args)
    if inst.solution_set is None:
        raise CommandError("bound not applicable: instance declares no solution set", EXIT_PRECONDITION)
    try:
        gamma = gamma_from_cones(inst.game, inst.feasible, inst.solution_set)
    except UncertifiedSolutionSetError as exc:
        raise CommandError(f"bound not applicable: {exc}", EXIT_PRECONDITION) from None
    if not gamma > 0 or math.isinf(gamma):
        raise CommandError("bound not applicable: X* not weakly sharp", EXIT_PRECONDITION)
    d0 = float(inst.solution_set.distance(x0))
    bound = iteration_bound(d0, cfg.epsilon, gamma)
    outcome = {"d0": d0, "epsilon": cfg.epsilon, "gamma": gamma, "bound": bound,
               "k0_max": int(math.floor(bound + 1e-12))}
    code = EXIT_OK
    if args.trace is not None:
        cols = trace_from_csv(Path(args.trace).read_text())
        k0 = measured_termination_index(cols["gap_Va"], cfg.tol_term)
        outcome["measured_k0"] = k0
        outcome["pass"] = k0 is not None and k0 <= bound
        if k0 is None:
            code = EXIT_CAP
    return code, outcome, {**_config_dict(cfg), "x0": x0.tolist()}, inst, None


def cmd_verify(source, args):
    """Load, certify the declared solution set and, for bundled fixtures, re-check the facts."""
    inst = _open_instance(source)
    outcome = {"delta": float(inst.game.delta), "positive_definite": bool(inst.game.is_positive_definite),
               "warnings": list(inst.warnings), "solution_residuals": None, "facts": None}
    if inst.solution_set is not None:
        pts = np.asarray(inst.solution_set.vertices(), dtype=float).reshape(-1, inst.game.n)
        outcome["solution_residuals"] = [float(vi_residual(inst.game, inst.feasible, p)) for p in pts]
    if not Path(source).exists() and source in FIXTURE_NAMES:
        fx = load_fixture(source)
        outcome["facts"] = [{"name": n, "ok": ok, "detail": d} for n, ok, d in fx.checks]
    return EXIT_OK, outcome, {}, inst, None


COMMANDS = {"solve": cmd_solve, "diagnose": cmd_diagnose, "bound": cmd_bound, "verify": cmd_verify}


def _jsonable(v):
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.floating, float)):
        v = float(v)
        if math.isnan(v):
            return None
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    return v


def run_one(command, source, args, argv):
    """Run one command on one instance; returns (exit code, report dict, trace CSV or None)."""
    t0 = time.perf_counter()
    inst_echo = {"source": str(source)}
    try:
        code, outcome, config, inst, csv_text = COMMANDS[command](source, args)
        inst_echo = _instance_echo(source, inst)
        error = None
    except CommandError as exc:
        code, outcome, config, csv_text, error = exc.code, None, {}, None, str(exc)
    except FixtureValidationError as exc:
        code, outcome, config, csv_text, error = EXIT_INPUT, None, {}, None, str(exc)
    except ConvergenceError as exc:
        code, outcome, config, csv_text, error = EXIT_CAP, None, {}, None, str(exc)
    except INPUT_ERRORS as exc:
        code, outcome, config, csv_text, error = EXIT_INPUT, None, {}, None, f"{source}: {exc}"
    report = {
        "command": command,
        "argv": list(argv),
        "config": config,
        "instance": inst_echo,
        "outcome": outcome,
        "error": error,
        "exit_code": code,
        "wall_time": time.perf_counter() - t0,
        "version": __version__,
    }
    return code, _jsonable(report), csv_text


def _stem(source):
    return Path(str(source)).stem if Path(str(source)).suffix == ".json" else str(source)


def _bound_lines(report):
    o = report["outcome"]
    lines = [f"d0 = {o['d0']!r}", f"epsilon = {o['epsilon']!r}", f"gamma = {o['gamma']!r}",
             f"bound = {o['bound']:.4f}", f"k0 <= {o['k0_max']}"]
    if "measured_k0" in o:
        lines.append(f"measured k0 = {o['measured_k0']}")
        lines.append("PASS" if o["pass"] else "FAIL")
    return lines


def build_parser():
    p = argparse.ArgumentParser(prog="gnepsharp", description="GNEP gap functions, sharpness diagnostics and PPA.")
    p.add_argument("--version", action="version", version=f"gnepsharp {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a random quadratic instance")
    g.add_argument("--players", type=int, default=2)
    g.add_argument("--dim", type=int, default=1, help="dimension per player")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--delta-floor", type=float, default=0.5)
    g.add_argument("--out", help="output file (stdout when omitted)")

    def common(sp):
        sp.add_argument("--instance", action="append", required=True, help="instance file or fixture name")
        sp.add_argument("--a", type=float)
        sp.add_argument("--out", help="output directory for reports and traces")
        sp.add_argument("--jobs", type=int, default=1)
        sp.add_argument("--seed", type=int, default=0)

    s = sub.add_parser("solve", help="run PPA or extragradient")
    common(s)
    s.add_argument("--method", choices=("ppa", "extragradient"), default="ppa")
    s.add_argument("--r", type=_floats, help="constant r or comma-separated schedule")
    s.add_argument("--epsilon", type=float)
    s.add_argument("--x0", type=_floats)
    s.add_argument("--tol", type=float)
    s.add_argument("--max-iters", type=int)

    d = sub.add_parser("diagnose", help="weak sharpness / error bound / linear conditioning report")
    common(d)
    d.add_argument("--grid", type=int, default=41)

    b = sub.add_parser("bound", help="finite-termination iteration bound")
    common(b)
    b.add_argument("--r", type=_floats)
    b.add_argument("--epsilon", type=float)
    b.add_argument("--x0", type=_floats)
    b.add_argument("--tol", type=float)
    b.add_argument("--max-iters", type=int)
    b.add_argument("--trace", help="trace CSV from `solve` to compare the measured k0")

    v = sub.add_parser("verify", help="load and certify instances (and fixture facts)")
    common(v)
    return p


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK

    if args.command == "generate":
        if args.delta_floor < 0 or args.players < 1 or args.dim < 1:
            print("error: need players >= 1, dim >= 1, delta-floor >= 0", file=sys.stderr)
            return EXIT_INPUT
        text = cmd_generate(args.players, args.dim, args.seed, args.delta_floor)
        if args.out:
            Path(args.out).write_text(text)
        else:
            sys.stdout.write(text)
        return EXIT_OK

    sources = args.instance
    if args.jobs > 1 and len(sources) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(run_one, [args.command] * len(sources), sources,
                                    [args] * len(sources), [argv] * len(sources)))
    else:
        results = [run_one(args.command, s, args, argv) for s in sources]

    out = Path(args.out) if args.out else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
    reports = []
    for source, (code, report, csv_text) in zip(sources, results):
        reports.append(report)
        if report["error"]:
            print(f"error: {report['error']}", file=sys.stderr)
        if args.command == "bound" and report["outcome"] is not None:
            print("\n".join(_bound_lines(report)))
        if out is not None:
            (out / f"{_stem(source)}.{args.command}.json").write_text(json.dumps(report, indent=2) + "\n")
            if csv_text is not None:
                (out / f"{_stem(source)}.trace.csv").write_text(csv_text)
    if out is None and args.command != "bound":
        payload = reports[0] if len(reports) == 1 else reports
        print(json.dumps(payload, indent=2))
    return max(code for code, _, _ in results)


if __name__ == "__main__":
    sys.exit(main())
