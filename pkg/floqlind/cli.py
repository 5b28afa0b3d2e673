from __future__ import annotations

import json
import logging
import math
from logging import FileHandler, Formatter, StreamHandler

import click
from pydantic import ValidationError

from floqlind.errors import NumericalError, ScenarioError, ScenarioValidationError
from floqlind.models.registry import MODELS
from floqlind.pipeline import run_scenario, validate_scenario
from floqlind.scenario.io import load_scenario
from floqlind.utils.options import Tolerances
from floqlind.utils.settings import load_config, save_config

EXIT_SCENARIO = 2
EXIT_NUMERICAL = 3


def _setup_logging(level: str, logfile: str | None) -> None:
    lvl = getattr(logging, level.upper(), logging.INFO)
    root = logging.getLogger()
    root.setLevel(lvl)
    # Clear default handlers if any
    for h in list(root.handlers):
        root.removeHandler(h)
    fmt = Formatter("%(asctime)s %(levelname)s %(name)s: %(message)s")
    sh = StreamHandler()
    sh.setFormatter(fmt)
    root.addHandler(sh)
    if logfile:
        fh = FileHandler(logfile, encoding="utf-8")
        fh.setFormatter(fmt)
        root.addHandler(fh)


def _parse_tolerances(pairs: tuple[str, ...]) -> dict[str, float]:
    known = set(Tolerances.__dataclass_fields__)
    out: dict[str, float] = {}
    for pair in pairs:
        key, sep, value = pair.partition("=")
        if not sep or key not in known:
            raise click.UsageError(
                f"Bad --tol '{pair}'; use NAME=VALUE with NAME one of: {', '.join(sorted(known))}"
            )
        try:
            out[key] = float(value)
        except ValueError:
            raise click.UsageError(f"Bad --tol value in '{pair}'") from None
    return out


def _report_scenario_error(e: Exception) -> None:
    diagnostics = getattr(e, "diagnostics", None) or [str(e)]
    for line in diagnostics:
        click.echo(f"ERROR: {line}", err=True)


@click.group()
@click.option(
    "--log-level",
    type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]),
    default="INFO",
    show_default=True,
    help="Set logging verbosity.",
)
@click.option(
    "--log-file",
    type=click.Path(dir_okay=False, writable=True),
    default=None,
    help="Also write logs to this file.",
)
def cli(log_level: str, log_file: str | None) -> None:
    """FloqLind: Floquet analysis and CP certification of periodic Lindblad dynamics"""
    _setup_logging(log_level, log_file)


@cli.command("run")
@click.argument("scenario_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default=None, help="Output directory")
@click.option("--step", type=float, default=None, help="Integrator step (overrides scenario)")
@click.option("--grid", type=int, default=None, help="Certification grid points (overrides scenario)")
@click.option("--tol", "tols", multiple=True, help="Tolerance override NAME=VALUE, e.g. psd=1e-8")
@click.pass_context
def do_run(
    ctx: click.Context,
    scenario_file: str,
    out_dir: str | None,
    step: float | None,
    grid: int | None,
    tols: tuple[str, ...],
) -> None:
    """Run every command of a scenario and write the results."""
    overrides = _parse_tolerances(tols)
    try:
        scenario = load_scenario(scenario_file)
        manifest = run_scenario(scenario, out_dir=out_dir, step=step, grid=grid, tol_overrides=overrides)
    except (ScenarioError, ValidationError) as e:
        _report_scenario_error(e)
        ctx.exit(EXIT_SCENARIO)
    except NumericalError as e:
        click.echo(f"ERROR: {type(e).__name__}: {e}", err=True)
        ctx.exit(EXIT_NUMERICAL)
    click.echo(f"✔ {len(manifest['commands'])} commands completed for {manifest['model']['name']}")


@cli.command("validate")
@click.argument("scenario_file", type=click.Path(exists=True, dir_okay=False))
@click.pass_context
def do_validate(ctx: click.Context, scenario_file: str) -> None:
    """Check a scenario without running it."""
    try:
        scenario = load_scenario(scenario_file)
        diagnostics = validate_scenario(scenario, Tolerances.from_config(load_config()))
        if diagnostics:
            raise ScenarioValidationError(diagnostics)
    except ScenarioError as e:
        _report_scenario_error(e)
        ctx.exit(EXIT_SCENARIO)
    click.echo(f"✔ {scenario_file} is valid ({len(scenario.commands)} commands)")


@cli.command("list-models")
def list_models() -> None:
    """List the built-in models and their default parameters."""
    for name, entry in sorted(MODELS.items()):
        click.echo(f"{name}: {entry.description}")
        for key, value in entry.defaults.items():
            click.echo(f"    {key} = {value}")


@cli.group()
def config() -> None:
    """Manage FloqLind configuration"""
    pass


@config.command("show")
def show_cfg() -> None:
    """Show current FloqLind configuration."""
    cfg = load_config()
    click.echo(json.dumps(cfg.model_dump(), indent=2))


@config.command("set-step")
@click.argument("step", type=float)
def set_step(step: float) -> None:
    """Set the default integrator step."""
    if not step > 0 or not math.isfinite(step):
        raise click.UsageError("Step must be a positive number.")
    save_config(step=step)
    click.echo(f"✔ Default step set to: {step}")


@config.command("set-grid")
@click.argument("grid", type=int)
def set_grid(grid: int) -> None:
    """Set the default certification grid density."""
    if grid < 2:
        raise click.UsageError("Grid needs at least 2 points.")
    save_config(grid=grid)
    click.echo(f"✔ Default grid set to: {grid}")


@config.command("set-tol")
@click.argument("name", type=click.Choice(["herm", "psd", "comm", "roundtrip", "boundary", "quad_abs"]))
@click.argument("value", type=float)
def set_tol(name: str, value: float) -> None:
    """Set one default tolerance."""
    if not value > 0:
        raise click.UsageError("Tolerances must be positive.")
    key = {"boundary": "boundary_tol", "quad_abs": "quad_abs_tol"}.get(name, f"tol_{name}")
    save_config(**{key: value})
    click.echo(f"✔ Tolerance {name} set to: {value}")


@config.command("set-out")
@click.argument("directory", type=click.Path(file_okay=False))
def set_out(directory: str) -> None:
    """Set the default output directory."""
    save_config(output_dir=directory)
    click.echo(f"Default output_dir set to: {directory}")


if __name__ == "__main__":
    cli()
