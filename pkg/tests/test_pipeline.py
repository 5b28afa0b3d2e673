import csv
import json
import math

import pytest

from floqlind.errors import NotCommutativeError, ScenarioValidationError
from floqlind.pipeline import build_spec, run_scenario, validate_scenario
from floqlind.scenario.io import parse_scenario
from floqlind.utils.settings import load_config


def _scenario(model, *commands, **sections):
    return parse_scenario({"model": model, "commands": list(commands), **sections})


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def _header(path):
    with open(path, newline="") as fh:
        return next(csv.reader(fh))


def test_random_qubit_scenario(tmp_path):
    scenario = _scenario(
        {"name": "random-qubit"},
        {"kind": "simulate", "points": 5},
        {"kind": "floquet"},
        {"kind": "certify-cp", "target": "periodic-part", "points": 9},
        {"kind": "certify-divisibility", "method": "kossakowski", "points": 8},
        {"kind": "region-a", "points": 4},
        numerics={"grid": 16},
    )
    manifest = run_scenario(scenario, out_dir=tmp_path)

    assert manifest["model"] == {
        "name": "random-qubit",
        "dim": 2,
        "period": pytest.approx(2 * math.pi),
        "breakpoints": [],
    }
    kinds = [c["kind"] for c in manifest["commands"]]
    assert kinds == ["simulate", "floquet", "certify-cp", "certify-divisibility", "region-a"]

    simulate = manifest["commands"][0]
    assert simulate["method"] == "commutative"
    assert simulate["max_tp_residual"] < 1e-12
    rows = _rows(tmp_path / "1-simulate.csv")
    assert len(rows) == 5 * 4
    assert list(rows[0]) == ["t[time]", "row", "col", "re[1]", "im[1]"]
    assert float(rows[0]["re[1]"]) == 1.0

    floquet = manifest["commands"][1]
    assert floquet["mode"] == "commutative"
    assert floquet["semigroup_test"]["markovian"] is True
    assert floquet["partition"]["E1e"] == [0]
    floquet_rows = _rows(tmp_path / "2-floquet.csv")
    assert len(floquet_rows) == 4
    assert list(floquet_rows[0]) == [
        "index", "mu_re[1/time]", "mu_im[1/time]", "lambda_re[1]", "lambda_im[1]", "class"
    ]
    assert _header(tmp_path / "3-certify-cp.csv") == [
        "t[time]", "cp", "min_choi_eig[1]", "tp_residual[1]", "star_residual[1]"
    ]
    assert _header(tmp_path / "4-certify-divisibility.csv") == ["t[time]", "min_eig[1/time]"]
    assert _header(tmp_path / "5-region-a.csv") == ["x[1]", "y[1]", "z[1]"]

    assert manifest["commands"][2]["points"] == 9
    divisibility = manifest["commands"][3]
    assert divisibility["markovian"] is False
    assert divisibility["target"] == "periodic-part"

    region = manifest["commands"][4]
    assert region["samples"] == 16
    assert region["trajectory_points"] == 16

    written = json.loads((tmp_path / "manifest.json").read_text())
    assert written["commands"][1]["mode"] == "commutative"


def test_tls_divisibility_scan_and_spectra(tmp_path):
    scenario = _scenario(
        {"name": "driven-tls", "params": {"gamma_up": 0.3, "gamma_down": 0.9}},
        {"kind": "certify-divisibility", "target": "propagator", "points": 6},
        {"kind": "spectra-trajectory", "points": 4, "maps": ["propagator", "semigroup"]},
        numerics={"workers": 2},
    )
    manifest = run_scenario(scenario, out_dir=tmp_path)
    scan, spectra = manifest["commands"]
    assert scan["markovian"] is True
    assert scan["grid_density"] == 6
    assert _rows(tmp_path / "1-certify-divisibility.csv") == []
    assert _header(tmp_path / "1-certify-divisibility.csv") == ["t[time]", "s[time]", "min_choi_eig[1]"]

    rows = _rows(tmp_path / "2-spectra-trajectory.csv")
    assert list(rows[0]) == ["map", "t[time]", "index", "re[1]", "im[1]"]
    assert len(rows) == 2 * 4 * 4
    assert {r["map"] for r in rows} == {"propagator", "semigroup"}
    assert spectra["final_conjugation_mismatch"]["semigroup"] < 1e-10


def test_inline_piecewise_model(tmp_path):
    scenario = _scenario(
        {
            "name": "inline",
            "dim": 2,
            "period": 1.0,
            "kossakowski": [
                {"row": 0, "col": 0, "re": {"family": "piecewise-constant", "edges": [0.5], "values": [1.0, 0.2]}},
                {"row": 1, "col": 1, "re": {"family": "piecewise-constant", "edges": [0.5], "values": [1.0, 0.2]}},
            ],
            "hamiltonian": [{"row": 0, "col": 0, "re": {"family": "cosine", "amplitude": 0.5}}],
        },
        {"kind": "simulate", "method": "general", "t_end": 2.0, "points": 3},
        {"kind": "certify-divisibility", "method": "kossakowski", "points": 4},
        numerics={"step": 0.01},
    )
    manifest = run_scenario(scenario, out_dir=tmp_path)
    assert manifest["model"]["breakpoints"] == [0.5]
    assert manifest["numerics"]["step"] == 0.01
    assert manifest["commands"][0]["method"] == "general"
    # the grid picks up the breakpoint
    assert manifest["commands"][1]["grid_density"] == 5
    assert manifest["commands"][1]["markovian"] is False


def test_invalid_inline_model_fails_before_running(tmp_path):
    scenario = _scenario(
        {
            "name": "inline",
            "dim": 2,
            "period": 1.0,
            "kossakowski": [{"row": 0, "col": 0, "re": {"family": "cosine", "amplitude": 1.0}}],
        },
        {"kind": "floquet"},
    )
    diagnostics = validate_scenario(scenario)
    assert diagnostics
    assert all(d.startswith("model: ") for d in diagnostics)
    with pytest.raises(ScenarioValidationError):
        run_scenario(scenario, out_dir=tmp_path / "out")
    assert not (tmp_path / "out" / "manifest.json").exists()


def test_unknown_model_params_are_diagnostics():
    scenario = _scenario({"name": "driven-tls", "params": {"gamma": 1.0}}, {"kind": "floquet"})
    assert validate_scenario(scenario) == ["model: Unknown model parameters: gamma"]


def test_numerical_failure_propagates(tmp_path):
    scenario = _scenario({"name": "m3-counterexample"}, {"kind": "floquet", "mode": "commutative"})
    with pytest.raises(NotCommutativeError):
        run_scenario(scenario, out_dir=tmp_path)


def test_override_precedence(tmp_path):
    scenario = _scenario(
        {"name": "random-qubit", "params": {"constant": [0.1, 0.2, 0.3]}},
        {"kind": "certify-cp", "points": 3},
        numerics={"step": 0.02, "grid": 10, "tolerances": {"psd": 1e-7}},
    )
    cfg = load_config()
    manifest = run_scenario(scenario, out_dir=tmp_path, cfg=cfg)
    assert manifest["numerics"]["step"] == 0.02
    assert manifest["numerics"]["grid"] == 10
    assert manifest["numerics"]["tolerances"]["psd"] == 1e-7

    manifest = run_scenario(scenario, out_dir=tmp_path, step=0.05, grid=12, tol_overrides={"psd": 1e-6})
    assert manifest["numerics"]["step"] == 0.05
    assert manifest["numerics"]["grid"] == 12
    assert manifest["numerics"]["tolerances"]["psd"] == 1e-6


def test_default_output_directory_comes_from_config(tmp_path):
    scenario = _scenario({"name": "random-qubit"}, {"kind": "floquet", "semigroup_test": False})
    run_scenario(scenario)
    assert (tmp_path / "runs" / "manifest.json").exists()


def test_build_spec_returns_model_object():
    spec, model = build_spec(parse_scenario({"model": {"name": "driven-tls"}, "commands": [{"kind": "floquet"}]}).model)
    assert spec.name == "driven-tls"
    assert model.spec is spec


def test_inline_explicit_breakpoints_are_merged():
    model = parse_scenario(
        {
            "model": {
                "name": "inline",
                "dim": 2,
                "period": 1.0,
                "breakpoints": [0.25],
                "kossakowski": [
                    {"row": 2, "col": 2, "re": {"family": "piecewise-constant", "edges": [0.5], "values": [1.0, 0.5]}}
                ],
            },
            "commands": [{"kind": "floquet"}],
        }
    ).model
    spec, obj = build_spec(model)
    assert obj is None
    assert spec.breakpoints == (0.25, 0.5)


def test_builtin_model_rejects_breakpoints():
    with pytest.raises(ScenarioValidationError):
        parse_scenario({"model": {"name": "random-qubit", "breakpoints": [1.0]}, "commands": [{"kind": "floquet"}]})


def test_non_hermitian_inline_entry_is_named():
    one = {"family": "constant", "value": 1.0}
    scenario = _scenario(
        {
            "name": "inline",
            "dim": 2,
            "period": 1.0,
            "kossakowski": [
                {"row": 0, "col": 0, "re": one},
                {"row": 1, "col": 1, "re": one},
                {"row": 2, "col": 2, "re": one},
                {"row": 0, "col": 1, "re": {"family": "constant", "value": 0.3}},
            ],
        },
        {"kind": "floquet"},
    )
    assert validate_scenario(scenario) == [
        "model: Kossakowski entry (0, 1) not Hermitian at t=0.0078125 (residual 3.000e-01); "
        "fails at 64 of 64 samples"
    ]
