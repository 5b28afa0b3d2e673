import json

import pytest

from floqlind.errors import ScenarioValidationError
from floqlind.main import run
from floqlind.scenario.io import parse_scenario

SCENARIO = """
[model]
name = "random-qubit"

[output]
directory = "{out}"

[[commands]]
kind = "floquet"
semigroup_test = false

[[commands]]
kind = "certify-cp"
target = "periodic-part"
points = 5
"""


def test_run_from_file(tmp_path):
    out = tmp_path / "out"
    path = tmp_path / "scenario.toml"
    path.write_text(SCENARIO.format(out=out.as_posix()), encoding="utf-8")

    manifest = run(path)
    assert [c["kind"] for c in manifest["commands"]] == ["floquet", "certify-cp"]
    assert manifest["commands"][1]["points"] == 5
    assert json.loads((out / "manifest.json").read_text()) == json.loads(json.dumps(manifest))


def test_run_out_dir_overrides_scenario(tmp_path):
    path = tmp_path / "scenario.toml"
    path.write_text(SCENARIO.format(out=(tmp_path / "ignored").as_posix()), encoding="utf-8")
    run(str(path), out_dir=tmp_path / "chosen")
    assert (tmp_path / "chosen" / "manifest.json").exists()
    assert not (tmp_path / "ignored").exists()


def test_run_scenario_object(tmp_path):
    scenario = parse_scenario({"model": {"name": "driven-tls"}, "commands": [{"kind": "floquet"}]})
    manifest = run(scenario, out_dir=tmp_path)
    assert manifest["model"]["name"] == "driven-tls"
    assert manifest["commands"][0]["semigroup_test"]["markovian"] is True


def test_run_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        run(tmp_path / "nope.toml")


def test_run_invalid_document(tmp_path):
    path = tmp_path / "scenario.toml"
    path.write_text('[model]\nname = "random-qubit"\n', encoding="utf-8")
    with pytest.raises(ScenarioValidationError) as exc:
        run(path)
    assert any("commands" in d for d in exc.value.diagnostics)
