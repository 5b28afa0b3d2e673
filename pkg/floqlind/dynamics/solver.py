from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from tqdm import tqdm

from floqlind.dynamics.lindblad import (
    LindbladSpec,
    assemble_generator,
    generator_at,
    is_commutative,
)
from floqlind.dynamics.quadrature import QUAD_ABS_TOL, antiderivatives, breakpoints_between
from floqlind.errors import NotCommutativeError, StepTooLargeError
from floqlind.linalg.matfuncs import matrix_exp, norm2
from floqlind.linalg.superop import Superoperator, apply_superop, superop_identity, tp_residual
from floqlind.utils.options import IntegratorOptions, Tolerances

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class PropagatorTrajectory:
    """Λ_t sampled on ``times``; ``values[i]`` is the d²×d² matrix at ``times[i]``."""

    spec: LindbladSpec
    times: np.ndarray
    values: np.ndarray = field(repr=False)
    method: Literal["general", "commutative"]
    step: float
    max_local_error: float = 0.0

    def __len__(self) -> int:
        return len(self.times)

    @property
    def t_max(self) -> float:
        return float(self.times[-1])

    def superop(self, i: int) -> Superoperator:
        return Superoperator(self.values[i], self.spec.basis)

    @property
    def final(self) -> Superoperator:
        return self.superop(len(self.times) - 1)

    def at(self, t: float, validate: bool = False) -> Superoperator:
        """
        Λ_t for any t in [0, t_max]: stepped from the preceding node with
        the midpoint rule (general) or evaluated in closed form (commutative).
        """
        if t < 0 or t > self.t_max * (1 + 1e-12) + 1e-15:
            raise ValueError(f"t={t} outside trajectory range [0, {self.t_max}]")
        i = int(np.searchsorted(self.times, t, side="right")) - 1
        i = max(i, 0)
        if math.isclose(self.times[i], t, rel_tol=0, abs_tol=1e-14):
            return self.superop(i)
        if self.method == "commutative":
            return solve_commutative(self.spec, t)
        local = midpoint_propagator(self.spec, float(self.times[i]), t, self.step, validate)
        return Superoperator(local.matrix @ self.values[i], self.spec.basis)


# ---------------------------------------------------------------------------
# Step grid
# ---------------------------------------------------------------------------


def _check_step(spec: LindbladSpec, step: float) -> None:
    if not step > 0:
        raise ValueError(f"Integrator step must be positive, got {step}")
    if spec.breakpoints:
        marks = sorted(set(spec.breakpoints) | {0.0})
        gaps = np.diff([*marks, marks[0] + spec.period])
        smallest = float(np.min(gaps))
        if step > smallest:
            raise StepTooLargeError(
                f"Step {step} exceeds the smallest breakpoint gap {smallest}"
            )


def step_grid(spec: LindbladSpec, t_max: float, step: float) -> np.ndarray:
    """
    Nodes on [0, t_max]: every breakpoint (and T-translate) is a node and
    each segment between them is split into equal substeps no longer than
    ``step``.
    """
    _check_step(spec, step)
    if t_max < 0:
        raise ValueError(f"t_max must be non-negative, got {t_max}")
    if t_max == 0:
        return np.array([0.0])
    edges = [0.0, *breakpoints_between(spec, 0.0, t_max), float(t_max)]
    nodes = [0.0]
    for lo, hi in zip(edges[:-1], edges[1:]):
        n = max(1, math.ceil((hi - lo) / step - 1e-9))
        nodes.extend(lo + (hi - lo) * k / n for k in range(1, n + 1))
    return np.array(nodes)


# ---------------------------------------------------------------------------
# Integrators
# ---------------------------------------------------------------------------


def midpoint_propagator(
    spec: LindbladSpec, t0: float, t1: float, step: float, validate: bool = False
) -> Superoperator:
    """Product of midpoint exponentials from t0 to t1 (t1 may be < t0) with no breakpoint inside."""
    span = t1 - t0
    n = max(1, math.ceil(abs(span) / step - 1e-9))
    h = span / n
    out = np.eye(spec.basis.size, dtype=np.complex128)
    for k in range(n):
        mid = t0 + (k + 0.5) * h
        gen = generator_at(spec, mid, validate=validate).matrix
        out = matrix_exp(h * gen) @ out
    return Superoperator(out, spec.basis)


def integrate_general(
    spec: LindbladSpec,
    t_max: float,
    step: float | None = None,
    options: IntegratorOptions = IntegratorOptions(),
    tol: Tolerances = Tolerances(),
) -> PropagatorTrajectory:
    """
    Solve dΛ/dt = L_t Λ, Λ_0 = id, by second-order midpoint Magnus stepping
    Λ_{t+h} = exp(h L_{t+h/2}) Λ_t on a breakpoint-aligned grid.

    Raises
    ------
    InvalidGeneratorError
        If the spec is invalid at a midpoint.
    StepTooLargeError
        If ``step`` exceeds the smallest breakpoint gap.
    """
    h_target = step if step is not None else options.step
    times = step_grid(spec, t_max, h_target)
    size = spec.basis.size
    values = np.empty((len(times), size, size), dtype=np.complex128)
    values[0] = np.eye(size)

    prev_gen: np.ndarray | None = None
    prev2_gen: np.ndarray | None = None
    max_err = 0.0
    iterator = range(1, len(times))
    if options.progress:
        iterator = tqdm(iterator, desc=f"Integrating {spec.name}", unit="step", dynamic_ncols=True)
    for i in iterator:
        h = times[i] - times[i - 1]
        mid = times[i - 1] + 0.5 * h
        gen = generator_at(spec, mid, validate=options.validate, tol=tol).matrix
        values[i] = matrix_exp(h * gen) @ values[i - 1]
        if prev_gen is not None and prev2_gen is not None:
            # third-order local error terms of the midpoint rule
            second = prev_gen - 0.5 * (gen + prev2_gen)
            comm = prev_gen @ (gen - prev2_gen) - (gen - prev2_gen) @ prev_gen
            max_err = max(max_err, h * norm2(second) / 12 + h * h * norm2(comm) / 24)
        prev2_gen, prev_gen = prev_gen, gen
        if options.verify_nodes:
            residual = tp_residual(Superoperator(values[i], spec.basis))
            if residual > tol.roundtrip:
                logger.warning("TP residual %.3e at t=%.6g", residual, times[i])

    logger.debug(
        "Integrated %s to t=%.6g in %d steps (local error estimate %.3e)",
        spec.name, t_max, len(times) - 1, max_err,
    )
    return PropagatorTrajectory(
        spec=spec,
        times=times,
        values=values,
        method="general",
        step=h_target,
        max_local_error=max_err,
    )


def solve_commutative(
    spec: LindbladSpec,
    t: float,
    check: bool = False,
    tol: Tolerances = Tolerances(),
) -> Superoperator:
    """
    Λ_t = exp(−i ad[ℋ_t] + Σ A_jk(t) D_jk), exact when the generators commute.

    Raises
    ------
    NotCommutativeError
        If ``check`` is set and the sampled commutativity residual exceeds tolerance.
    """
    if check and not is_commutative(spec, tol=tol):
        raise NotCommutativeError(f"Generators of {spec.name} do not commute")
    if t == 0:
        return superop_identity(spec.basis)
    h_int, a_int = antiderivatives(spec, t, abs_tol=tol.quad_abs or QUAD_ABS_TOL)
    return assemble_generator(h_int, a_int, spec.basis).exp()


def commutative_trajectory(
    spec: LindbladSpec, times: np.ndarray, tol: Tolerances = Tolerances()
) -> PropagatorTrajectory:
    values = np.array([solve_commutative(spec, float(t), tol=tol).matrix for t in times])
    return PropagatorTrajectory(
        spec=spec,
        times=np.asarray(times, dtype=float),
        values=values,
        method="commutative",
        step=float(np.max(np.diff(times))) if len(times) > 1 else 0.0,
    )


def evolve_state(lam: Superoperator, rho0: np.ndarray) -> np.ndarray:
    """ρ_t = Λ_t(ρ₀)."""
    return apply_superop(lam, rho0)
