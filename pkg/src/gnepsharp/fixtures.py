"""Canonical instances shared by tests, demos and the CLI.

``E1`` is the sharp two-player game on ``[1, 2]^2`` with solution
``(1, 1)``; ``E0`` uses the same matrices on ``[0, 1]^2`` where the solution
``(0, 0)`` has ``F(x*) = 0`` (not sharp).  ``random-sharp-k`` and
``random-degenerate-k`` (k = 0..4) come from
:func:`gnepsharp.instances.constructed_instance`.

Each fixture is an instance file plus a ``.facts.json`` sidecar; every fact
is re-checked against an independent oracle when the fixture is loaded.
"""

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .diagnostics import gamma_from_cones
from .instances import constructed_instance, dumps, loads
from .nikaido import RegularizedEvaluator, gap_Va
from .oracle import grid_points, grid_scan_nne, grid_Va, sampled_cone_gamma
from .vi import vi_residual

NAMES = ("E1", "E0") + tuple(f"random-{kind}-{k}" for kind in ("sharp", "degenerate") for k in range(5))


class FixtureValidationError(AssertionError):
    pass


@dataclass
class Fixture:
    name: str
    instance: object
    facts: list
    checks: list = field(default_factory=list)

    def fact(self, name):
        for f in self.facts:
            if f["name"] == name:
                return f["value"]
        raise KeyError(name)


def fixture_dir():
    return Path(str(resources.files("gnepsharp") / "data" / "fixtures"))


def fixture_paths(name):
    d = fixture_dir()
    return d / f"{name}.json", d / f"{name}.facts.json"


def _check_fact(inst, fact):
    """Return (ok, detail) for one fact using oracles independent of the main path."""
    game, S = inst.game, inst.feasible
    name, value, tol = fact["name"], fact["value"], fact.get("tol", 1e-8)
    if name == "delta":
        ref = float(np.linalg.eigvalsh(game.C + game.C.T)[0])
        return abs(ref - value) <= tol and abs(game.delta - value) <= tol, f"numpy {ref!r}, model {game.delta!r}"
    if name == "x_star":
        x = np.asarray(value, dtype=float)
        res = vi_residual(game, S, x)
        grid = fact.get("grid", 41)
        cells = grid_scan_nne(game, S, grid)
        _, cell = grid_points(S, grid)
        near = bool(np.min(np.linalg.norm(cells - x, axis=1)) <= cell + 1e-12)
        return res <= tol and near, f"vi_residual {res:.3g}, grid cells {len(cells)}, near={near}"
    if name == "gamma_cone":
        cone = gamma_from_cones(game, S, inst.solution_set)
        sampled = sampled_cone_gamma(game, S, inst.solution_set.point)
        ok = abs(cone - value) <= tol and abs(sampled - value) <= tol
        return ok, f"cone {cone!r}, sampled {sampled!r}"
    if name == "V_a":
        ev = RegularizedEvaluator(game, fact["a"])
        main = gap_Va(ev, S, fact["at"])
        est = grid_Va(ev, S, fact["at"], fact.get("grid", 101))
        ok = abs(main - value) <= tol and est.value <= value + tol and value - est.value <= est.error + tol
        return ok, f"gap_Va {main!r}, grid {est.value!r} +/- {est.error:.3g}"
    raise FixtureValidationError(f"unknown fact {name!r}")


def load_fixture(name, validate=True):
    """Load a fixture and re-validate every certified fact; failures raise loudly."""
    if name not in NAMES:
        raise KeyError(f"unknown fixture {name!r}; available: {', '.join(NAMES)}")
    inst_path, facts_path = fixture_paths(name)
    inst = loads(inst_path.read_text(), name=name)
    facts = json.loads(facts_path.read_text())["facts"]
    fx = Fixture(name, inst, facts)
    if validate:
        for fact in facts:
            ok, detail = _check_fact(inst, fact)
            fx.checks.append((fact["name"], ok, detail))
            if not ok:
                raise FixtureValidationError(f"{name}: fact {fact['name']} failed ({detail})")
    return fx


def constructed_facts(kind, data):
    """Facts sidecar for a constructed instance (values follow from the construction)."""
    inst = loads(dumps(data))
    x = inst.solution_set.point
    F = inst.game.F(x)
    gamma = float(np.min(np.abs(F))) if kind == "sharp" else 0.0
    return {"facts": [
        {"name": "delta", "value": inst.game.delta, "tol": 1e-10, "provenance": "derived",
         "oracle": "numpy eigvalsh of C + C^T"},
        {"name": "x_star", "value": x.tolist(), "tol": 1e-10, "provenance": "derived",
         "oracle": "natural residual and grid residual scan"},
        {"name": "gamma_cone", "value": gamma, "tol": 1e-8, "provenance": "derived",
         "oracle": "min |F_j(x*)| at a box vertex; sampled tangent directions"},
    ]}


def write_constructed_fixtures(directory=None):
    """Regenerate the random-* fixture files from their constructors."""
    d = Path(directory) if directory is not None else fixture_dir()
    for kind in ("sharp", "degenerate"):
        for k in range(5):
            data = constructed_instance(kind, k)
            (d / f"random-{kind}-{k}.json").write_text(dumps(data))
            (d / f"random-{kind}-{k}.facts.json").write_text(dumps(constructed_facts(kind, data)))
