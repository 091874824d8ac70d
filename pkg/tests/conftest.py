import numpy as np
import pytest

from gnepsharp.fixtures import load_fixture
from gnepsharp.geometry import Box
from gnepsharp.instances import generate_instance, parse_instance
from gnepsharp.model import build_quadratic_game

E1_BLOCKS = {(0, 0): [[1.0]], (0, 1): [[0.25]], (1, 0): [[0.25]], (1, 1): [[1.0]]}


@pytest.fixture(scope="session")
def e1():
    return load_fixture("E1").instance


@pytest.fixture(scope="session")
def e0():
    return load_fixture("E0").instance


@pytest.fixture(scope="session")
def e1_game():
    return build_quadratic_game((1, 1), E1_BLOCKS)


@pytest.fixture(scope="session")
def box12():
    return Box([1.0, 1.0], [2.0, 2.0])


def random_instances(count, seed0=0, delta_floor=0.5, players=(2, 3)):
    """Generated instances with 2-3 players and scalar strategies."""
    out = []
    for s in range(count):
        p = players[s % len(players)]
        out.append(parse_instance(generate_instance(p, 1, seed0 + s, delta_floor), name=f"gen-{seed0 + s}"))
    return out


def feasible_points(S, m, rng):
    lo, hi = S.bounding_box()
    return S.project(rng.uniform(lo, hi, size=(m, S.dim)))


@pytest.fixture(scope="session")
def schemas():
    import json
    from importlib import resources
    base = resources.files("gnepsharp") / "schemas"
    return {k: json.loads((base / f"{k}.schema.json").read_text()) for k in ("instance", "facts", "run_report")}


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for key in sorted(RESULTS, key=lambda k: int(k[1:])):
            terminalreporter.write_line(RESULTS[key])
