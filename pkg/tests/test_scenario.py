import csv
import json
import textwrap

import pytest

from floqlind.errors import ScenarioValidationError
from floqlind.scenario.io import load_scenario, parse_scenario, plot_spectra, write_csv, write_manifest
from floqlind.scenario.schema import CertifyDivisibilityCommand, Scenario


def _write(tmp_path, text, name="scenario.toml"):
    path = tmp_path / name
    path.write_text(textwrap.dedent(text), encoding="utf-8")
    return path


def test_load_builtin_scenario(tmp_path):
    path = _write(
        tmp_path,
        """
        [model]
        name = "driven-tls"
        params = { gamma_up = 0.25 }

        [numerics]
        step = 0.004
        tolerances = { psd = 1e-8 }

        [[commands]]
        kind = "floquet"

        [[commands]]
        kind = "certify-divisibility"
        t_end = 3.0
        """,
    )
    scenario = load_scenario(path)
    assert isinstance(scenario, Scenario)
    assert scenario.model.params == {"gamma_up": 0.25}
    assert scenario.numerics.tolerances == {"psd": 1e-8}
    assert [c.kind for c in scenario.commands] == ["floquet", "certify-divisibility"]
    div = scenario.commands[1]
    assert isinstance(div, CertifyDivisibilityCommand)
    assert div.target == "periodic-part"
    assert div.method == "scan"
    assert div.t_end == 3.0


def test_inline_model_with_families():
    scenario = parse_scenario(
        {
            "model": {
                "name": "inline",
                "dim": 2,
                "period": 1.0,
                "kossakowski": [
                    {"row": 0, "col": 0, "re": {"family": "piecewise-constant", "edges": [0.5], "values": [1.0, 2.0]}},
                    {"row": 2, "col": 2, "re": {"family": "raised-cosine", "amplitude": 1.0}},
                ],
            },
            "commands": [{"kind": "simulate"}],
        }
    )
    entry = scenario.model.kossakowski[0]
    assert entry.re.build(1.0).breakpoints == (0.5,)


@pytest.mark.parametrize(
    "data, fragment",
    [
        ({"model": {"name": "driven-tls"}, "commands": [{"kind": "teleport"}]}, "commands"),
        ({"model": {"name": "driven-tls"}, "commands": []}, "commands"),
        ({"model": {"name": "no-such-model"}, "commands": [{"kind": "floquet"}]}, "unknown model"),
        ({"model": {"name": "inline", "dim": 2}, "commands": [{"kind": "floquet"}]}, "period"),
        (
            {
                "model": {"name": "inline", "dim": 2, "period": 1.0, "hamiltonian": [{"row": 2, "col": 0}]},
                "commands": [{"kind": "floquet"}],
            },
            "outside",
        ),
        (
            {"model": {"name": "driven-tls", "dim": 2}, "commands": [{"kind": "floquet"}]},
            "inline",
        ),
        (
            {"model": {"name": "driven-tls"}, "numerics": {"tolerances": {"fuzz": 1.0}}, "commands": [{"kind": "floquet"}]},
            "unknown tolerances",
        ),
        (
            {"model": {"name": "driven-tls"}, "commands": [{"kind": "simulate", "t_start": 2.0, "t_end": 1.0}]},
            "t_end",
        ),
        ({"model": {"name": "driven-tls"}, "commands": [{"kind": "floquet", "colour": "red"}]}, "colour"),
    ],
)
def test_invalid_scenarios(data, fragment):
    with pytest.raises(ScenarioValidationError) as exc:
        parse_scenario(data)
    assert any(fragment in d for d in exc.value.diagnostics), exc.value.diagnostics


def test_bad_toml(tmp_path):
    path = _write(tmp_path, "[model\nname = 1")
    with pytest.raises(ScenarioValidationError):
        load_scenario(path)
    with pytest.raises(FileNotFoundError):
        load_scenario(tmp_path / "missing.toml")


def test_writers(tmp_path):
    n = write_csv(tmp_path / "out.csv", ("t", "cp", "x"), [(0.1, True, 1), (1 / 3, False, 2)])
    assert n == 2
    with open(tmp_path / "out.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["t", "cp", "x"]
    assert rows[1] == ["0.10000000000000001", "true", "1"]
    assert float(rows[2][0]) == 1 / 3

    write_manifest(tmp_path / "manifest.json", {"b": 1, "a": [1.5]})
    text = (tmp_path / "manifest.json").read_text()
    assert text.index('"a"') < text.index('"b"')
    assert json.loads(text) == {"a": [1.5], "b": 1}


def test_plot_spectra(tmp_path):
    pytest.importorskip("matplotlib")
    rows = [("propagator", 0.0, 0, 1.0, 0.0), ("semigroup", 0.0, 0, 0.5, 0.1)]
    assert plot_spectra(tmp_path / "s.svg", rows, "test")
    assert (tmp_path / "s.svg").read_text().lstrip().startswith("<?xml")
