from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np

from floqlind.certify.cptp import cptp_report
from floqlind.certify.divisibility import (
    certification_grid,
    divisibility_scan,
    kossakowski_divisibility,
)
from floqlind.certify.region import choi_oracle, region_A_membership, region_a_boundary
from floqlind.certify.semigroup import semigroup_cp_test
from floqlind.dynamics.lindblad import LindbladSpec, is_commutative, validate_spec
from floqlind.dynamics.solver import integrate_general, solve_commutative
from floqlind.errors import FiniteDifferenceError, InvalidModelError, ScenarioValidationError
from floqlind.floquet.normal_form import FloquetForm, floquet_split
from floqlind.floquet.spectrum import characteristic_spectrum
from floqlind.linalg.matfuncs import conjugation_mismatch
from floqlind.linalg.superop import Superoperator, apply_superop, tp_residual
from floqlind.models.families import merged_breakpoints
from floqlind.models.random_qubit import RandomQubitModel
from floqlind.models.registry import build_model
from floqlind.scenario import io
from floqlind.scenario.schema import (
    CertifyCPCommand,
    CertifyDivisibilityCommand,
    FloquetCommand,
    ModelSpec,
    RegionACommand,
    Scenario,
    SimulateCommand,
    SpectraTrajectoryCommand,
)
from floqlind.utils.options import FloquetOptions, IntegratorOptions, Tolerances
from floqlind.utils.settings import AppConfig, load_config

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Model construction
# ---------------------------------------------------------------------------


def _table(entries, size: int, period: float) -> tuple[Callable[[float], np.ndarray], list]:
    built = [
        (e.row, e.col, e.re.build(period) if e.re else None, e.im.build(period) if e.im else None)
        for e in entries
    ]
    families = [f for _, _, re, im in built for f in (re, im) if f is not None]

    def _value(t: float) -> np.ndarray:
        m = np.zeros((size, size), dtype=np.complex128)
        for row, col, re, im in built:
            m[row, col] += (re(t) if re else 0.0) + 1j * (im(t) if im else 0.0)
        return m

    return _value, families


def build_inline_spec(model: ModelSpec) -> LindbladSpec:
    """Spec from an inline coefficient table; piecewise families add their edges to the breakpoints."""
    d, period = model.dim, model.period
    hamiltonian, h_fam = _table(model.hamiltonian, d, period)
    kossakowski, a_fam = _table(model.kossakowski, d * d - 1, period)
    return LindbladSpec(
        dim=d,
        period=period,
        hamiltonian=hamiltonian,
        kossakowski=kossakowski,
        breakpoints=tuple(sorted(set(model.breakpoints) | set(merged_breakpoints(h_fam + a_fam)))),
        name="inline",
    )


def build_spec(model: ModelSpec) -> tuple[LindbladSpec, Any]:
    """Return (spec, model object); the model object is None for inline specs."""
    if model.name == "inline":
        return build_inline_spec(model), None
    obj = build_model(model.name, **model.params)
    return obj.spec, obj


def validate_scenario(scenario: Scenario, tol: Tolerances = Tolerances()) -> list[str]:
    """
    Build the scenario's model and sample its coefficients.

    Returns human-readable diagnostics; an empty list means the scenario can run.
    """
    try:
        spec, _ = build_spec(scenario.model)
    except (InvalidModelError, ValueError, TypeError) as e:
        return [f"model: {e}"]
    return [f"model: {msg}" for msg in validate_spec(spec, tol=tol)]


# ---------------------------------------------------------------------------
# Run context
# ---------------------------------------------------------------------------


@dataclass
class RunContext:
    spec: LindbladSpec
    model: Any
    tol: Tolerances
    step: float
    grid: int
    workers: int
    progress: bool
    branch_cut: str
    out_dir: Path
    plots: bool = False
    _forms: dict[str, FloquetForm] = field(default_factory=dict)

    def floquet(self, mode: str = "auto") -> FloquetForm:
        if mode not in self._forms:
            options = FloquetOptions(
                mode=mode,
                integrator=IntegratorOptions(step=self.step, progress=self.progress),
                branch_cut=self.branch_cut,
                tolerances=self.tol,
            )
            self._forms[mode] = floquet_split(self.spec, options)
        return self._forms[mode]

    def map_at(self, target: str, t: float) -> Superoperator:
        form = self.floquet()
        if target == "periodic-part":
            return form.periodic_part(t)
        if target == "semigroup":
            return form.semigroup(t)
        return form.propagator(t)

    def window(self, cmd) -> tuple[tuple[float, float], int]:
        t_end = cmd.t_end if cmd.t_end is not None else cmd.t_start + self.spec.period
        return (cmd.t_start, t_end), cmd.points or self.grid


def _sorted_eigvals(m: np.ndarray) -> np.ndarray:
    w = np.linalg.eigvals(m)
    return w[np.lexsort((-w.imag, -w.real))]


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def _initial_state(cmd: SimulateCommand, d: int) -> np.ndarray:
    if cmd.rho0_re is None and cmd.rho0_im is None:
        rho = np.zeros((d, d), dtype=np.complex128)
        rho[0, 0] = 1.0
        return rho
    re = np.asarray(cmd.rho0_re if cmd.rho0_re is not None else np.zeros((d, d)), dtype=float)
    im = np.asarray(cmd.rho0_im if cmd.rho0_im is not None else np.zeros((d, d)), dtype=float)
    if re.shape != (d, d) or im.shape != (d, d):
        raise ScenarioValidationError([f"simulate: rho0 must be {d}x{d}"])
    return re + 1j * im


def _run_simulate(ctx: RunContext, cmd: SimulateCommand, stem: str) -> dict[str, Any]:
    (t0, t1), points = ctx.window(cmd)
    times = np.linspace(t0, t1, points)
    rho0 = _initial_state(cmd, ctx.spec.dim)
    method = cmd.method
    if method == "auto":
        method = "commutative" if is_commutative(ctx.spec, tol=ctx.tol) else "general"

    if method == "commutative":
        maps = [solve_commutative(ctx.spec, float(t), check=cmd.method == "commutative", tol=ctx.tol) for t in times]
    else:
        traj = integrate_general(
            ctx.spec, t1, ctx.step, IntegratorOptions(step=ctx.step, progress=ctx.progress), ctx.tol
        )
        maps = [traj.at(float(t)) for t in times]

    rows, worst_tp = [], 0.0
    for t, lam in zip(times, maps):
        worst_tp = max(worst_tp, tp_residual(lam))
        rho = apply_superop(lam, rho0)
        for i in range(ctx.spec.dim):
            for j in range(ctx.spec.dim):
                rows.append((float(t), i, j, float(rho[i, j].real), float(rho[i, j].imag)))
    path = ctx.out_dir / f"{stem}.csv"
    io.write_csv(path, ("t[time]", "row", "col", "re[1]", "im[1]"), rows)
    return {"method": method, "points": points, "file": path.name, "max_tp_residual": worst_tp}


def _run_floquet(ctx: RunContext, cmd: FloquetCommand, stem: str) -> dict[str, Any]:
    form = ctx.floquet(cmd.mode)
    lam, mu, _, report = characteristic_spectrum(form, tol=ctx.tol.boundary)
    rows = [
        (j, float(m.real), float(m.imag), float(l.real), float(l.imag), report.classes[j])
        for j, (m, l) in enumerate(zip(mu, lam))
    ]
    path = ctx.out_dir / f"{stem}.csv"
    header = ("index", "mu_re[1/time]", "mu_im[1/time]", "lambda_re[1]", "lambda_im[1]", "class")
    io.write_csv(path, header, rows)
    entry: dict[str, Any] = {
        "mode": form.mode,
        "file": path.name,
        "diagonalizable": form.diagonalizable,
        "monodromy_mismatch": form.monodromy_mismatch,
        "multiplier_conjugation_mismatch": conjugation_mismatch(lam),
        "partition": report.partition,
        "unstable": report.unstable,
        "periodic_limit_exists": report.periodic_limit_exists,
        "eigvec_checks": report.eigvec_checks,
    }
    if cmd.semigroup_test:
        try:
            result = semigroup_cp_test(form, ctx.spec, tol=ctx.tol)
            entry["semigroup_test"] = {
                "markovian": result.markovian,
                "min_eig": result.min_eig,
                "standard_form_valid": result.standard_form_valid,
                "one_sided": result.one_sided,
            }
        except FiniteDifferenceError as e:
            logger.warning("Semigroup test skipped: %s", e)
            entry["semigroup_test"] = {"error": str(e)}
    return entry


def _run_certify_cp(ctx: RunContext, cmd: CertifyCPCommand, stem: str) -> dict[str, Any]:
    interval, points = ctx.window(cmd)
    times = certification_grid(interval, points, ctx.spec.breakpoints, ctx.spec.period)
    rows, failing = [], []
    for t in times:
        r = cptp_report(ctx.map_at(cmd.target, float(t)), ctx.tol)
        rows.append((float(t), r.cp, r.min_choi_eig, r.tp_residual, r.star_residual))
        if not r.cp:
            failing.append(float(t))
    path = ctx.out_dir / f"{stem}.csv"
    header = ("t[time]", "cp", "min_choi_eig[1]", "tp_residual[1]", "star_residual[1]")
    io.write_csv(path, header, rows)
    return {
        "target": cmd.target,
        "file": path.name,
        "points": len(times),
        "all_cp": not failing,
        "failing_points": len(failing),
        "first_failure": failing[0] if failing else None,
    }


def _run_certify_divisibility(
    ctx: RunContext, cmd: CertifyDivisibilityCommand, stem: str
) -> dict[str, Any]:
    interval, points = ctx.window(cmd)
    path = ctx.out_dir / f"{stem}.csv"
    if cmd.method == "kossakowski":
        grid = certification_grid(interval, points, ctx.spec.breakpoints, ctx.spec.period)
        report = kossakowski_divisibility(ctx.spec, interval, grid, ctx.tol)
        io.write_csv(path, ("t[time]", "min_eig[1/time]"), report.kossakowski_violations)
        target = "periodic-part"
    else:
        grid = certification_grid(interval, points, ctx.spec.breakpoints, ctx.spec.period)
        report = divisibility_scan(
            lambda t: ctx.map_at(cmd.target, t),
            interval,
            grid,
            ctx.tol,
            workers=ctx.workers,
            progress=ctx.progress,
        )
        io.write_csv(path, ("t[time]", "s[time]", "min_choi_eig[1]"), report.violations)
        target = cmd.target
    return {
        "method": cmd.method,
        "target": target,
        "file": path.name,
        "markovian": report.markovian,
        "grid_density": report.grid_density,
        "nonmarkovian_windows": [list(w) for w in report.nonmarkovian_windows],
        "marginal": report.marginal,
        "local_violations": len(report.local_violations),
        "cp_sufficiency_violations": len(report.cp_sufficiency_violations),
    }


def _run_spectra(ctx: RunContext, cmd: SpectraTrajectoryCommand, stem: str) -> dict[str, Any]:
    (t0, t1), points = ctx.window(cmd)
    times = np.linspace(t0, t1, points)
    rows = []
    final_mismatch: dict[str, float] = {}
    for name in cmd.maps:
        for t in times:
            w = _sorted_eigvals(ctx.map_at(name, float(t)).matrix)
            rows.extend((name, float(t), k, float(z.real), float(z.imag)) for k, z in enumerate(w))
        final_mismatch[name] = conjugation_mismatch(w)
    path = ctx.out_dir / f"{stem}.csv"
    io.write_csv(path, ("map", "t[time]", "index", "re[1]", "im[1]"), rows)
    entry: dict[str, Any] = {
        "file": path.name,
        "points": points,
        "maps": list(cmd.maps),
        "final_conjugation_mismatch": final_mismatch,
    }
    if ctx.plots:
        svg = ctx.out_dir / f"{stem}.svg"
        if io.plot_spectra(svg, rows, f"{ctx.spec.name}: spectra on [{t0:g}, {t1:g}]"):
            entry["plot"] = svg.name
    return entry


def _run_region_a(ctx: RunContext, cmd: RegionACommand, stem: str) -> dict[str, Any]:
    xs = np.linspace(0.0, cmd.x_max, cmd.points)
    ys = np.linspace(0.0, cmd.y_max, cmd.points)
    samples = region_a_boundary(xs, ys)
    path = ctx.out_dir / f"{stem}.csv"
    io.write_csv(path, ("x[1]", "y[1]", "z[1]"), (tuple(map(float, r)) for r in samples))
    entry: dict[str, Any] = {"file": path.name, "samples": len(samples)}
    if isinstance(ctx.model, RandomQubitModel):
        times = np.linspace(0.0, ctx.spec.period, ctx.grid)
        thetas = [ctx.model.theta(float(t)) for t in times]
        member = [region_A_membership(th, tol=ctx.tol.boundary)[0] for th in thetas]
        oracle = [choi_oracle(th) >= -ctx.tol.boundary for th in thetas]
        entry["trajectory_points"] = len(times)
        entry["trajectory_in_region"] = int(sum(member))
        entry["oracle_agreement"] = bool(member == oracle)
    return entry


_HANDLERS: dict[str, Callable[[RunContext, Any, str], dict[str, Any]]] = {
    "simulate": _run_simulate,
    "floquet": _run_floquet,
    "certify-cp": _run_certify_cp,
    "certify-divisibility": _run_certify_divisibility,
    "spectra-trajectory": _run_spectra,
    "region-a": _run_region_a,
}


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def run_scenario(
    scenario: Scenario,
    out_dir: str | Path | None = None,
    cfg: AppConfig | None = None,
    step: float | None = None,
    grid: int | None = None,
    tol_overrides: dict[str, float] | None = None,
) -> dict[str, Any]:
    """
    Execute every command of ``scenario`` in order and write the results.

    Explicit arguments override the scenario's numerics, which override the
    application config. Returns the manifest that is also written to
    ``manifest.json`` in the output directory.

    Raises
    ------
    ScenarioValidationError
        If the model fails validation before any computation.
    NumericalError
        From the numerical layers.
    """
    cfg = cfg or load_config()
    numerics = scenario.numerics
    tol = Tolerances.from_config(cfg).with_overrides(**numerics.tolerances)
    tol = tol.with_overrides(**(tol_overrides or {}))

    diagnostics = validate_scenario(scenario, tol)
    if diagnostics:
        raise ScenarioValidationError(diagnostics)
    spec, model = build_spec(scenario.model)

    target = Path(out_dir or scenario.output.directory or cfg.output_dir)
    target.mkdir(parents=True, exist_ok=True)
    ctx = RunContext(
        spec=spec,
        model=model,
        tol=tol,
        step=step or numerics.step or cfg.step,
        grid=grid or numerics.grid or cfg.grid,
        workers=numerics.workers or cfg.workers,
        progress=cfg.progress,
        branch_cut=numerics.branch_cut or cfg.branch_cut,
        out_dir=target,
        plots=scenario.output.plots,
    )
    logger.info("Running %d commands on %s -> %s", len(scenario.commands), spec.name, target)

    entries = []
    for index, cmd in enumerate(scenario.commands, start=1):
        stem = f"{index}-{cmd.kind}"
        logger.info("Command %s", stem)
        entry = _HANDLERS[cmd.kind](ctx, cmd, stem)
        entry["kind"] = cmd.kind
        entries.append(entry)

    manifest = {
        "model": {
            "name": scenario.model.name,
            "dim": spec.dim,
            "period": spec.period,
            "breakpoints": list(spec.breakpoints),
        },
        "numerics": {
            "step": ctx.step,
            "grid": ctx.grid,
            "branch_cut": ctx.branch_cut,
            "tolerances": asdict(tol),
        },
        "commands": entries,
    }
    io.write_manifest(target / "manifest.json", manifest)
    return manifest
