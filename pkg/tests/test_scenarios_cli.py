import dataclasses
import json

import numpy as np
import pytest
from numpy.testing import assert_allclose

from gauged_reduce import checks
from gauged_reduce.cli import main
from gauged_reduce.errors import ScenarioSelfCheckFailure
from gauged_reduce.scenarios import (SO5_REFERENCE_LAMBDA, builtin_scenarios, get_scenario, so5_join,
                                     so5_split)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


# -- registry -----------------------------------------------------------------------

def test_registry():
    assert builtin_scenarios() == ["calogero_so3", "hopf", "so3_r3", "so5_pairs"]


def test_self_checks(scenario, rng):
    assert scenario.self_check(rng, samples=10)


def test_canonicalization_round_trip(scenario, rng):
    M = scenario.manifold
    for _ in range(20):
        q = scenario.sample_orbit_point(rng)
        k = M.canonicalize(q)
        assert np.linalg.norm(M.action.act(k, q) - M.section(M.invariants(q))) <= 1e-8


def test_self_check_names_the_failing_invariant(rng):
    sc = get_scenario("so3_r3")
    broken = dataclasses.replace(sc, lam_invariants=lambda lam: np.asarray(lam))
    with pytest.raises(ScenarioSelfCheckFailure) as exc:
        broken.self_check(rng)
    assert exc.value.invariant == "lambda invariants are H-invariant"
    assert exc.value.scenario == "so3_r3"


def test_so5_reference_lambda_matrix():
    sc = get_scenario("so5_pairs")
    X = sc.algebra.matrix(sc.reference_lambda)
    expected = np.array([[0, 1, 1, 0, 0],
                         [-1, 0, -1, 1, 0],
                         [-1, 1, 0, 0, 0],
                         [0, -1, 0, 0, 0],
                         [0, 0, 0, 0, 0]], dtype=float)
    assert_allclose(X, expected)
    assert_allclose(SO5_REFERENCE_LAMBDA, sc.reference_lambda)


def test_so3_and_hopf_isotropy():
    M = get_scenario("so3_r3").manifold
    assert M.isotropy_algebra(np.array([0.0, 0.0, 1.0])).dim == 1
    assert get_scenario("hopf").h_sub.dim == 0


def test_so5_split_is_equivariant_isomorphism(rng):
    sc = get_scenario("so5_pairs")
    alg = sc.algebra
    for _ in range(5):
        lam = sc.sample_lambda(rng)
        t, v, w = so5_split(lam)
        assert_allclose(so5_join(t, v, w), lam, atol=1e-15)
        k = alg.exp(sc.h_sub.basis @ rng.standard_normal(3))
        R = k[2:, 2:]
        t2, v2, w2 = so5_split(alg.Ad_star(k, lam))
        assert t2 == pytest.approx(t)
        assert_allclose(v2, R @ v, atol=1e-12)
        assert_allclose(w2, R @ w, atol=1e-12)
    # seven free parameters fill Ann h
    J = np.column_stack([so5_join(*np.split(e, [1, 4]))
                         for e in np.eye(7)])
    assert np.linalg.matrix_rank(J) == 7


def test_calogero_default_hamiltonian_is_free(rng):
    from gauged_reduce import weinstein as W
    sc = get_scenario("calogero_so3")
    M = sc.manifold
    H = W.ExprObservable(sc.default_hamiltonian, M)
    free = W.free_hamiltonian(M)
    for _ in range(5):
        w = sc.sample_point(rng)
        assert H(w) == pytest.approx(free(w), rel=1e-10)


# -- reports -------------------------------------------------------------------------

@pytest.mark.parametrize("name", ["so3_r3", "hopf", "calogero_so3", "so5_pairs"])
def test_report_schema_and_pass(name):
    rep = checks.report(name)
    assert rep["seed"] == checks.DEFAULT_SEED
    assert rep["reference_values"]
    for r in rep["reference_values"]:
        assert set(r) == {"name", "expected", "actual", "provenance", "tolerance", "pass"}
        assert r["provenance"] in {"PAPER", "TRIVIAL", "DERIVED"}
        assert r["pass"], r
    assert rep["pass"]
    json.dumps(rep)


def test_seed_env_override(monkeypatch):
    monkeypatch.setenv(checks.SEED_ENV, "7")
    assert checks.resolve_seed(3) == 7
    monkeypatch.delenv(checks.SEED_ENV)
    assert checks.resolve_seed(None) == 42
    assert checks.resolve_seed(3) == 3


def test_rng_is_counter_based_and_reproducible():
    a = checks.make_rng(123).standard_normal(5)
    b = checks.make_rng(123).standard_normal(5)
    assert_allclose(a, b)
    assert isinstance(checks.make_rng(1).bit_generator, np.random.Philox)


# -- CLI ---------------------------------------------------------------------------------

def test_cli_bracket_canonical_pair(capsys):
    code, out, _ = run(capsys, "bracket", "so3_r3", "--f", "e1", "--g", "x1")
    doc = json.loads(out)
    assert code == 0
    assert doc["value"] == pytest.approx(-1.0)
    assert doc["oracle"] == pytest.approx(-1.0, abs=1e-6)
    assert doc["matches_oracle"]


def test_cli_bracket_with_point(capsys):
    point = json.dumps({"x": [0.3, -0.2], "eta": [0.4, 0.1], "lambda": [1.5]})
    code, out, _ = run(capsys, "bracket", "hopf", "--f", "e1", "--g", "e2", "--point", point)
    doc = json.loads(out)
    assert code == 0
    assert abs(doc["terms"]["curvature"]) > 1e-3


def test_cli_check_deterministic(capsys):
    code, out1, _ = run(capsys, "--seed", "5", "check", "so3_r3", "--n-oracle", "20")
    _, out2, _ = run(capsys, "--seed", "5", "check", "so3_r3", "--n-oracle", "20")
    assert code == 0
    assert out1 == out2
    doc = json.loads(out1)
    assert doc["status"] == "PASS" and doc["seed"] == 5


def test_cli_check_so5_dims(capsys):
    code, out, _ = run(capsys, "check", "so5_pairs", "--n-oracle", "20")
    doc = json.loads(out)
    assert code == 0
    assert doc["status"] == "PASS"
    assert doc["dims"] == {"k_lambda": 2, "complement": 8, "intersection": 0, "mixed": 5, "V": 2, "leaf": 6}


def test_cli_leaf(capsys):
    code, out, _ = run(capsys, "leaf", "so5_pairs", "--lambda", json.dumps(SO5_REFERENCE_LAMBDA.tolist()))
    doc = json.loads(out)
    assert code == 0
    assert doc["dims"]["leaf"] == 6
    assert doc["magnetic_flag"] is True


def test_cli_report(capsys):
    code, out, _ = run(capsys, "report", "hopf")
    assert code == 0
    assert json.loads(out)["pass"]


def test_cli_flow_to_file(capsys, tmp_path):
    out_file = tmp_path / "traj.csv"
    code, out, _ = run(capsys, "flow", "so3_r3", "--h", "0.5*e1^2", "--T", "0.1", "--dt", "0.01",
                       "--format", "csv", "--out", str(out_file))
    summary = json.loads(out)
    assert code == 0
    assert summary["steps"] == 10
    lines = out_file.read_text().splitlines()
    assert lines[0].startswith("t,x1,eta1")
    assert len(lines) == 12


def test_cli_flow_hopf_energy(capsys):
    point = json.dumps({"x": [0.1, 0.0], "eta": [0.2, 0.1], "lambda": [1.0]})
    code, out, err = run(capsys, "flow", "hopf", "--h", "kin", "--point", point,
                         "--T", "10", "--dt", "1e-3", "--every", "1000")
    summary = json.loads(err)
    assert code == 0
    assert summary["energy_drift"] <= 1e-8
    assert len(out.splitlines()) == 11


@pytest.mark.parametrize("argv", [
    [],
    ["check", "nope"],
    ["bracket", "so3_r3", "--f", "e1 +", "--g", "x1"],
    ["bracket", "so3_r3", "--f", "x2", "--g", "x1"],
    ["bracket", "so3_r3", "--f", "e1", "--g", "x1", "--point", "{not json"],
    ["bracket", "so3_r3", "--f", "e1", "--g", "x1", "--point", '{"x": [1, 2], "eta": [0], "lambda": [0, 0, 0]}'],
    ["flow", "so3_r3", "--dt", "0"],
    ["leaf", "so3_r3", "--lambda", "[1, 2]"],
])
def test_cli_usage_errors(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert json.loads(err)["error"] == "usage"


def test_cli_runtime_errors(capsys):
    code, _, err = run(capsys, "bracket", "so3_r3", "--f", "sqrt(0-x1)", "--g", "x1")
    assert code == 1
    assert json.loads(err)["error"] == "EvalError"
    point = json.dumps({"x": [0.2], "eta": [-1.0], "lambda": [0, 0, 0]})
    code, _, err = run(capsys, "flow", "so3_r3", "--h", "0.5*e1^2", "--point", point, "--T", "1", "--dt", "0.01")
    assert code == 1
    assert json.loads(err)["error"] == "StepOutOfDomain"
    code, _, err = run(capsys, "leaf", "so3_r3", "--lambda", "[0, 0, 1]")
    assert code == 1
