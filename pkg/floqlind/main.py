from __future__ import annotations

from pathlib import Path
from typing import Any

from floqlind.pipeline import run_scenario, validate_scenario
from floqlind.scenario.io import load_scenario
from floqlind.scenario.schema import Scenario

__all__ = ["run", "validate_scenario"]


def run(scenario: str | Path | Scenario, out_dir: str | Path | None = None) -> dict[str, Any]:
    """
    Execute a FloqLind scenario using the Pydantic settings for defaults.

    Parameters
    ----------
    scenario : str | Path | Scenario
        - Path to a TOML scenario file
        - An already validated Scenario object
    out_dir : str | Path, optional
        Output directory; defaults to the scenario's [output] directory,
        then to the configured ``output_dir``.

    Returns
    -------
    manifest : dict
        The run manifest, also written to ``manifest.json``.

    Raises
    ------
    ScenarioError, NumericalError, FileNotFoundError
    """
    if not isinstance(scenario, Scenario):
        scenario = load_scenario(scenario)
    return run_scenario(scenario, out_dir=out_dir)
