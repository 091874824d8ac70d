import json

import jsonschema
import pytest

from gnepsharp.fixtures import NAMES, FixtureValidationError, _check_fact, fixture_dir, load_fixture


def test_e1_facts():
    fx = load_fixture("E1")
    assert all(ok for _, ok, _ in fx.checks)
    assert fx.fact("delta") == 0.5 and fx.fact("x_star") == [1.0, 1.0]
    assert fx.fact("gamma_cone") == 1.25 and fx.fact("V_a") == 1.5


def test_e0_gamma_zero():
    assert load_fixture("E0").fact("gamma_cone") == 0.0


@pytest.mark.parametrize("name", NAMES)
def test_every_fixture_revalidates(name):
    fx = load_fixture(name)
    assert len(fx.checks) == len(fx.facts) >= 3


def test_unknown_fixture():
    with pytest.raises(KeyError):
        load_fixture("E7")


def test_wrong_fact_fails_loudly():
    fx = load_fixture("E1", validate=False)
    ok, _ = _check_fact(fx.instance, {"name": "gamma_cone", "value": 1.2, "tol": 1e-8})
    assert not ok
    with pytest.raises(FixtureValidationError):
        _check_fact(fx.instance, {"name": "mystery", "value": 0})


def test_fixture_files_match_schemas(schemas):
    for p in sorted(fixture_dir().glob("*.json")):
        kind = "facts" if p.name.endswith(".facts.json") else "instance"
        jsonschema.validate(json.loads(p.read_text()), schemas[kind])
