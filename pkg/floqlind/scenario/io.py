from __future__ import annotations

import csv
import json
import logging
import sys
from pathlib import Path
from typing import Any, Iterable, Sequence

from pydantic import ValidationError

from floqlind.errors import ScenarioValidationError
from floqlind.scenario.schema import Scenario

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

logger = logging.getLogger(__name__)


def _format_errors(e: ValidationError) -> list[str]:
    out = []
    for err in e.errors():
        loc = ".".join(str(p) for p in err.get("loc", ()))
        out.append(f"{loc}: {err.get('msg')}" if loc else str(err.get("msg")))
    return out


def parse_scenario(data: dict[str, Any]) -> Scenario:
    try:
        return Scenario.model_validate(data)
    except ValidationError as e:
        raise ScenarioValidationError(_format_errors(e)) from e


def load_scenario(path: str | Path) -> Scenario:
    """Read and schema-validate a TOML scenario file."""
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(f"Scenario file not found: {path}")
    try:
        data = tomllib.loads(p.read_text(encoding="utf-8"))
    except tomllib.TOMLDecodeError as e:
        raise ScenarioValidationError([f"{p.name}: {e}"]) from e
    return parse_scenario(data)


def _cell(value: Any) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> int:
    """Write rows with full float precision; returns the number of data rows."""
    n = 0
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])
            n += 1
    logger.debug("Wrote %d rows to %s", n, path)
    return n


def write_manifest(path: Path, manifest: dict[str, Any]) -> None:
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def plot_spectra(path: Path, rows: Sequence[Sequence[Any]], title: str) -> bool:
    """
    Scatter eigenvalue trajectories (rows of map, t, index, re, im) per map
    into an SVG. Returns False when matplotlib is not installed.
    """
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        logger.warning("matplotlib not installed; skipping plot %s", path.name)
        return False

    maps = sorted({r[0] for r in rows})
    fig, axes = plt.subplots(1, len(maps), figsize=(4 * len(maps), 4), squeeze=False)
    for ax, name in zip(axes[0], maps):
        pts = [(r[3], r[4]) for r in rows if r[0] == name]
        ax.scatter([p[0] for p in pts], [p[1] for p in pts], s=4)
        ax.axhline(0.0, color="grey", lw=0.5)
        ax.axvline(0.0, color="grey", lw=0.5)
        ax.set_title(name)
        ax.set_xlabel("Re")
        ax.set_ylabel("Im")
    fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return True
