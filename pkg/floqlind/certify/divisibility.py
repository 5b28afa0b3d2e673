from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from tqdm import tqdm

from floqlind.certify.cptp import cptp_report
from floqlind.dynamics.lindblad import LindbladSpec, is_commutative
from floqlind.dynamics.quadrature import antiderivatives, period_integrals
from floqlind.errors import NotCommutativeError, SingularFamilyError
from floqlind.linalg.matfuncs import hermitian_part, norm2
from floqlind.linalg.superop import Superoperator
from floqlind.utils.options import Tolerances

logger = logging.getLogger(__name__)

MapFamily = Callable[[float], Superoperator]


@dataclass(frozen=True)
class DivisibilityReport:
    """
    Grid-relative CP-divisibility verdict.

    ``violations`` holds (t, s, min Choi eigenvalue of V_{t,s}) for failing
    pairs s < t; ``kossakowski_violations`` holds (t, min eig of
    a_t − (1/T)∫₀ᵀ a). ``nonmarkovian_windows`` are coalesced failing
    intervals. Failures smaller than the boundary tolerance are listed in
    ``marginal`` instead.
    """

    interval: tuple[float, float]
    grid: np.ndarray = field(repr=False)
    markovian: bool
    violations: list[tuple[float, float, float]] = field(default_factory=list)
    kossakowski_violations: list[tuple[float, float]] = field(default_factory=list)
    cp_sufficiency_violations: list[tuple[float, float]] = field(default_factory=list)
    nonmarkovian_windows: list[tuple[float, float]] = field(default_factory=list)
    local_violations: list[float] = field(default_factory=list)
    marginal: list[float] = field(default_factory=list)

    @property
    def grid_density(self) -> int:
        return len(self.grid)


def certification_grid(
    interval: tuple[float, float], points: int, breakpoints: Sequence[float] = (), period: float | None = None
) -> np.ndarray:
    """Uniform grid on ``interval`` plus breakpoints (and T-translates) inside it."""
    lo, hi = interval
    grid = set(np.linspace(lo, hi, points).tolist())
    if breakpoints and period:
        n_lo, n_hi = int(np.floor(lo / period)), int(np.ceil(hi / period))
        for n in range(n_lo, n_hi + 1):
            for b in breakpoints:
                t = n * period + b
                if lo < t < hi:
                    grid.add(t)
    return np.array(sorted(grid))


def _resolve_grid(interval: tuple[float, float], grid: int | Sequence[float]) -> np.ndarray:
    if isinstance(grid, (int, np.integer)):
        if grid < 2:
            raise ValueError(f"Grid needs at least 2 points, got {grid}")
        return np.linspace(interval[0], interval[1], int(grid))
    return np.asarray(sorted(grid), dtype=float)


def _coalesce(points: list[int], times: np.ndarray, pad_next: bool) -> list[tuple[float, float]]:
    windows: list[tuple[float, float]] = []
    if not points:
        return windows
    start = prev = points[0]
    for idx in points[1:] + [None]:
        if idx is not None and idx == prev + 1:
            prev = idx
            continue
        end = min(prev + 1, len(times) - 1) if pad_next else prev
        windows.append((float(times[start]), float(times[end])))
        if idx is not None:
            start = prev = idx
    return windows


# ---------------------------------------------------------------------------
# Propagator scan
# ---------------------------------------------------------------------------


def divisibility_scan(
    family: MapFamily,
    interval: tuple[float, float],
    grid: int | Sequence[float] = 128,
    tol: Tolerances = Tolerances(),
    workers: int = 1,
    progress: bool = False,
) -> DivisibilityReport:
    """
    Choi-test V_{t,s} = F_t F_s⁻¹ for all grid pairs s < t.

    Rows are evaluated in a thread pool when ``workers > 1``; the merged
    output order is deterministic.

    Raises
    ------
    SingularFamilyError
        If F_t is not invertible at a grid point.
    """
    times = _resolve_grid(interval, grid)
    values = [family(float(t)) for t in times]
    inverses = []
    for t, f in zip(times, values):
        cond = np.linalg.cond(f.matrix)
        if not np.isfinite(cond) or cond > 1e14:
            raise SingularFamilyError(f"Map family is singular at t={t} (cond {cond:.3e})", t=float(t))
        inverses.append(np.linalg.inv(f.matrix))

    def _row(i: int) -> list[tuple[int, int, float, float]]:
        out = []
        for j in range(i):
            v = Superoperator(values[i].matrix @ inverses[j], values[i].basis)
            report = cptp_report(v, tol)
            out.append((i, j, report.min_choi_eig, report.choi_norm))
        return out

    rows = range(1, len(times))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            results = list(tqdm(ex.map(_row, rows), total=len(rows), disable=not progress,
                                desc="Divisibility scan", unit="row", dynamic_ncols=True))
    else:
        results = [_row(i) for i in tqdm(rows, disable=not progress, desc="Divisibility scan",
                                         unit="row", dynamic_ncols=True)]

    violations, marginal, local = [], set(), []
    for row in results:
        for i, j, min_eig, scale in row:
            if min_eig >= -tol.psd * scale:
                continue
            if min_eig >= -tol.boundary * scale:
                marginal.add(float(times[j]))
                continue
            violations.append((float(times[i]), float(times[j]), float(min_eig)))
            if i == j + 1:
                local.append(j)
    local.sort()
    report = DivisibilityReport(
        interval=(float(interval[0]), float(interval[1])),
        grid=times,
        markovian=not violations,
        violations=violations,
        nonmarkovian_windows=_coalesce(local, times, pad_next=True),
        local_violations=[float(times[j]) for j in local],
        marginal=sorted(marginal),
    )
    logger.info(
        "Divisibility scan on [%g, %g] with %d points: %d violations, %d windows",
        interval[0], interval[1], len(times), len(violations), len(report.nonmarkovian_windows),
    )
    return report


# ---------------------------------------------------------------------------
# Kossakowski criterion (commutative families)
# ---------------------------------------------------------------------------


def kossakowski_divisibility(
    spec: LindbladSpec,
    interval: tuple[float, float],
    grid: int | Sequence[float] = 128,
    tol: Tolerances = Tolerances(),
    check_commutative: bool = True,
) -> DivisibilityReport:
    """
    Pointwise divisibility test a_t − (1/T)∫₀ᵀ a ⪰ 0 for the periodic part
    P_t, plus the sufficient CP condition ∫₀ᵗ a − (t/T)∫₀ᵀ a ⪰ 0.

    Raises
    ------
    NotCommutativeError
        If the spec's generators do not commute.
    """
    if check_commutative and not is_commutative(spec, tol=tol):
        raise NotCommutativeError(f"Kossakowski criterion requires commuting generators ({spec.name})")
    times = _resolve_grid(interval, grid)
    _, a_period = period_integrals(spec, tol.quad_abs)
    mean = a_period / spec.period

    div_violations, cp_violations, marginal, failing = [], [], [], []
    for i, t in enumerate(times):
        a_t = np.asarray(spec.kossakowski(float(t)), dtype=np.complex128)
        gap = hermitian_part(a_t - mean)
        scale = max(norm2(a_t), norm2(mean), 1.0)
        min_eig = float(np.linalg.eigvalsh(gap)[0])
        if min_eig < -tol.psd * scale:
            if min_eig >= -tol.boundary * scale:
                marginal.append(float(t))
            else:
                div_violations.append((float(t), min_eig))
                failing.append(i)
        if t > 0:
            _, a_int = antiderivatives(spec, float(t), tol.quad_abs)
            suff = hermitian_part(a_int - (t / spec.period) * a_period)
            suff_min = float(np.linalg.eigvalsh(suff)[0])
            if suff_min < -tol.boundary * scale:
                cp_violations.append((float(t), suff_min))

    report = DivisibilityReport(
        interval=(float(interval[0]), float(interval[1])),
        grid=times,
        markovian=not div_violations,
        kossakowski_violations=div_violations,
        cp_sufficiency_violations=cp_violations,
        nonmarkovian_windows=_coalesce(failing, times, pad_next=False),
        marginal=marginal,
    )
    logger.info(
        "Kossakowski criterion for %s: %d failing grid points", spec.name, len(div_violations)
    )
    return report
