"""Scenario parsing, suite orchestration, and report assembly."""

import json
import os

import numpy as np
import pytest
from numpy.testing import assert_allclose

from multlab.errors import ScenarioError
from multlab.scenarios import (
    REPORT_SCHEMA_VERSION,
    load_scenario,
    normalize_suites,
    parse_scenario,
    run_suites,
    write_report,
)

Z2_SCALAR = {"group": {"type": "cyclic", "n": 2}, "F_scalar": [1, -1]}


def test_parse_minimal_defaults():
    sc = parse_scenario({"group": {"type": "cyclic", "n": 3}})
    assert sc.group.order == 3
    assert sc.algebra.blocks == (1,)
    assert sc.tol == 1e-10
    assert sc.seed == 0x5EED
    assert sc.fiber_symbol is None and sc.grid_symbol is None
    assert sc.suites is None
    assert "pontryagin" in sc.default_suites()


def test_parse_group_kinds():
    sc = parse_scenario(
        {"group": {"type": "product",
                   "factors": [{"type": "cyclic", "n": 2}, {"type": "cyclic", "n": 2}]}}
    )
    assert sc.group.order == 4 and sc.group.is_abelian
    sc = parse_scenario({"group": {"type": "symmetric", "n": 3}})
    assert sc.group.order == 6 and not sc.group.is_abelian
    assert "pontryagin" not in sc.default_suites()
    sc = parse_scenario({"group": {"type": "table", "cayley": [[0, 1], [1, 0]]}})
    assert sc.group.order == 2


def test_parse_complex_pairs_and_fiber_specs():
    sc = parse_scenario(
        {
            "group": {"type": "cyclic", "n": 2},
            "algebra": {"blocks": [2]},
            "F": {
                "0": {"scale": 1},
                "1": {"kraus": [[[[0, 1], [0, 0]], [[0, 1], [0, 0]]]]},
            },
        }
    )
    ident = np.eye(2)
    assert_allclose(sc.fiber_symbol.fibers[0].apply(ident), ident)
    sc = parse_scenario(
        {"group": {"type": "cyclic", "n": 2}, "F_scalar": [[0, 1], [0, -1]]}
    )
    assert_allclose(sc.scalar_fibers, [1j, -1j])


def test_parse_translation_action():
    sc = parse_scenario({"group": {"type": "cyclic", "n": 3}, "action": "translation"})
    assert sc.algebra.blocks == (1, 1, 1)
    sc = parse_scenario(
        {"group": {"type": "cyclic", "n": 2}, "action": {"action": "translation"}}
    )
    assert sc.algebra.blocks == (1, 1)
    with pytest.raises(ScenarioError):
        parse_scenario(
            {
                "group": {"type": "cyclic", "n": 2},
                "algebra": {"blocks": [2]},
                "action": "translation",
            }
        )


@pytest.mark.parametrize(
    "data, fragment",
    [
        ({}, "group"),
        ({"group": {"type": "cyclic", "n": 2}, "bogus": 1}, "unknown scenario fields"),
        ({"group": {"type": "weird"}}, "unknown group type"),
        (
            {"group": {"type": "table", "cayley": [[0, 1, 2], [1, 0, 0], [2, 0, 1]]}},
            "associativity fails at (1, 1, 2)",
        ),
        ({"group": {"type": "cyclic", "n": 2}, "F_scalar": [1, 2, 3]}, "expected 2"),
        ({"group": {"type": "cyclic", "n": 2}, "F": {"0": {"scale": 1}}}, "missing fiber"),
        ({"group": {"type": "symmetric", "n": 3}, "u": [[1]]}, "abelian"),
        ({"group": {"type": "cyclic", "n": 2}, "u": [[1]]}, "shape"),
        ({"group": {"type": "cyclic", "n": 2}, "tol": -1}, "positive"),
        ({"group": {"type": "cyclic", "n": 2}, "suites": ["nope"]}, "unknown suite"),
        (
            {"group": {"type": "cyclic", "n": 2}, "module": [[1, 0], [0, 1]]},
            "module",
        ),
        (
            {"group": {"type": "cyclic", "n": 2}, "F_scalar": [1, 0], "F": {}},
            "only one",
        ),
    ],
)
def test_parse_errors(data, fragment):
    with pytest.raises(ScenarioError) as err:
        parse_scenario(data)
    assert fragment in str(err.value)


def test_scenario_hash_is_order_insensitive_and_content_sensitive():
    a = parse_scenario({"group": {"type": "cyclic", "n": 2}, "F_scalar": [1, -1]})
    b = parse_scenario({"F_scalar": [1, -1], "group": {"n": 2, "type": "cyclic"}})
    c = parse_scenario({"group": {"type": "cyclic", "n": 2}, "F_scalar": [1, 1]})
    assert a.hash == b.hash
    assert a.hash != c.hash
    assert len(a.hash) == 64


def test_normalize_suites():
    assert normalize_suites("takai,norms") == ("takai", "norms")
    assert normalize_suites(["schur", "schur"]) == ("schur",)
    with pytest.raises(ScenarioError):
        normalize_suites("")
    with pytest.raises(ScenarioError):
        normalize_suites("takai,bogus")


def test_run_suites_z2_all_pass_and_schema():
    sc = parse_scenario(dict(Z2_SCALAR))
    report, passed = run_suites(sc)
    assert passed
    assert set(report) == {"version", "scenario-hash", "seed", "suites", "checks", "norms"}
    assert report["version"] == REPORT_SCHEMA_VERSION == "1.0.0"
    assert report["seed"] == "0x5eed"
    assert report["scenario-hash"] == sc.hash
    names = [c["name"] for c in report["checks"]]
    assert "takai-relation-algebra" in names
    assert "transference-scalar-grid" in names
    assert "pontryagin-weyl-diagonal" in names
    for check in report["checks"]:
        assert set(check) == {"name", "residual", "tol", "pass", "time_ms"}
        assert check["pass"]
    hs = [n for n in report["norms"] if n["kind"] == "hs"]
    assert len(hs) == 1
    assert set(hs[0]) == {"kind", "value", "gap"}
    assert abs(hs[0]["value"] - 1.0) < 1e-6


def test_run_suites_deterministic_given_seed():
    sc = parse_scenario(dict(Z2_SCALAR))
    r1, _ = run_suites(sc)
    r2, _ = run_suites(sc)
    take = lambda rep: [(c["name"], c["residual"]) for c in rep["checks"]]
    assert take(r1) == take(r2)
    assert r1["norms"] == r2["norms"]
    r3, _ = run_suites(sc, seed=7)
    assert r3["seed"] == "0x7"


def test_run_suites_selection_and_validation():
    sc = parse_scenario({"group": {"type": "symmetric", "n": 3}})
    with pytest.raises(ScenarioError):
        run_suites(sc, suites="pontryagin")
    report, passed = run_suites(sc, suites="takai,herzschur")
    assert passed and report["suites"] == ["takai", "herzschur"]


def test_run_suites_ad_action_scenario():
    sc = parse_scenario(
        {
            "group": {"type": "cyclic", "n": 2},
            "algebra": {"blocks": [2]},
            "action": {
                "action": {"unitaries": [[[1, 0], [0, 1]], [[1, 0], [0, -1]]]}
            },
            "F_scalar": [1, 0.5],
        }
    )
    report, passed = run_suites(sc, suites="herzschur,transference,invariance")
    assert passed, report["checks"]


def test_run_suites_module_flags():
    base = {
        "group": {"type": "cyclic", "n": 2},
        "algebra": {"blocks": [2]},
        "action": {"action": {"unitaries": [[[1, 0], [0, 1]], [[1, 0], [0, -1]]]}},
        "F_scalar": [1, 0.5],
        "suites": ["herzschur"],
    }
    good = dict(base, module=[[2, 0], [0, 3]])
    report, passed = run_suites(parse_scenario(good))
    assert passed
    assert any(c["name"] == "herzschur-module-compatible" for c in report["checks"])
    bad = dict(base, module=[[0, 1], [1, 0]])
    report, passed = run_suites(parse_scenario(bad))
    assert not passed
    flag = [c for c in report["checks"] if c["name"] == "herzschur-module-compatible"]
    assert len(flag) == 1 and not flag[0]["pass"]


def test_run_suites_triangular_grid_norm():
    sc = parse_scenario(
        {"group": {"type": "cyclic", "n": 2}, "grid_scalar": [[1, 1], [0, 1]]}
    )
    report, passed = run_suites(sc, suites="norms")
    assert passed
    schur = [n for n in report["norms"] if n["kind"] == "schur"]
    assert len(schur) == 1
    assert abs(schur[0]["value"] - 2.0 / np.sqrt(3.0)) < 1e-6


def test_load_scenario_and_write_report(tmp_path):
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps(Z2_SCALAR))
    sc = load_scenario(str(path))
    report, passed = run_suites(sc, suites="takai")
    assert passed
    out = tmp_path / "report.json"
    write_report(report, str(out))
    loaded = json.loads(out.read_text())
    assert loaded["version"] == "1.0.0"
    assert loaded["checks"] == report["checks"]
    leftovers = [f for f in os.listdir(tmp_path) if f.startswith(".report-")]
    assert leftovers == []
    with pytest.raises(ScenarioError):
        load_scenario(str(tmp_path / "missing.json"))
