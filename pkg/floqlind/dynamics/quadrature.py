from __future__ import annotations

import logging
import math
from functools import lru_cache

import numpy as np
from scipy.integrate import quad_vec

from floqlind.dynamics.lindblad import LindbladSpec
from floqlind.errors import QuadratureAccuracyError

logger = logging.getLogger(__name__)

QUAD_ABS_TOL = 1e-12
QUAD_REL_TOL = 1e-10


def breakpoints_between(spec: LindbladSpec, t0: float, t1: float) -> list[float]:
    """Breakpoints and their T-translates strictly inside (t0, t1), plus period ends."""
    period = spec.period
    marks = set(spec.breakpoints) | {0.0}
    out = []
    first = math.floor(t0 / period)
    last = math.ceil(t1 / period)
    for n in range(first, last + 1):
        for b in marks:
            t = n * period + b
            if t0 < t < t1 and not math.isclose(t, t0) and not math.isclose(t, t1):
                out.append(t)
    return sorted(out)


def _pack(spec: LindbladSpec):
    d, n = spec.dim, spec.n_channels

    def _f(t: float) -> np.ndarray:
        h = np.asarray(spec.hamiltonian(t), dtype=np.complex128)
        a = np.asarray(spec.kossakowski(t), dtype=np.complex128)
        return np.concatenate([h.real.ravel(), h.imag.ravel(), a.real.ravel(), a.imag.ravel()])

    def _unpack(v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        dd, nn = d * d, n * n
        h = (v[:dd] + 1j * v[dd : 2 * dd]).reshape(d, d)
        a = (v[2 * dd : 2 * dd + nn] + 1j * v[2 * dd + nn :]).reshape(n, n)
        return h, a

    return _f, _unpack


def integrate_coefficients(
    spec: LindbladSpec, t0: float, t1: float, abs_tol: float = QUAD_ABS_TOL
) -> tuple[np.ndarray, np.ndarray]:
    """
    ∫_{t0}^{t1} H dt and ∫_{t0}^{t1} a dt by adaptive Gauss–Kronrod
    quadrature, split so that no panel straddles a breakpoint.

    Raises
    ------
    QuadratureAccuracyError
        If a segment's error estimate exceeds ``abs_tol`` plus
        ``QUAD_REL_TOL`` times the largest integral entry.
    """
    f, unpack = _pack(spec)
    total = np.zeros_like(f(t0))
    if t1 <= t0:
        return unpack(total)
    edges = [t0, *breakpoints_between(spec, t0, t1), t1]
    for lo, hi in zip(edges[:-1], edges[1:]):
        res, err, info = quad_vec(
            f, lo, hi, epsabs=abs_tol, epsrel=QUAD_REL_TOL, norm="max", quadrature="gk21", full_output=True
        )
        bound = abs_tol + QUAD_REL_TOL * float(np.max(np.abs(res)))
        if err > bound:
            raise QuadratureAccuracyError(
                f"Quadrature on [{lo}, {hi}] did not converge: {info.message}", estimate=float(err)
            )
        if not info.success:
            # rounding-limited but within the requested accuracy
            logger.debug("Quadrature on [%g, %g]: %s (estimate %.2e)", lo, hi, info.message, err)
        total += res
    return unpack(total)


@lru_cache(maxsize=64)
def period_integrals(spec: LindbladSpec, abs_tol: float = QUAD_ABS_TOL) -> tuple[np.ndarray, np.ndarray]:
    """(ℋ_T, A_T), cached per spec."""
    h, a = integrate_coefficients(spec, 0.0, spec.period, abs_tol)
    logger.debug("Period integrals of %s computed", spec.name)
    h.setflags(write=False)
    a.setflags(write=False)
    return h, a


def antiderivatives(
    spec: LindbladSpec, t: float, abs_tol: float = QUAD_ABS_TOL
) -> tuple[np.ndarray, np.ndarray]:
    """
    ℋ_t = ∫₀ᵗ H and A_t = ∫₀ᵗ a, extended beyond one period by additivity
    A_{t+nT} = A_t + n·A_T.
    """
    if t < 0:
        raise ValueError(f"Antiderivatives are defined for t >= 0, got {t}")
    n_periods = math.floor(t / spec.period)
    tau = t - n_periods * spec.period
    h_t, a_t = integrate_coefficients(spec, 0.0, tau, abs_tol)
    if n_periods:
        h_p, a_p = period_integrals(spec, abs_tol)
        h_t = h_t + n_periods * h_p
        a_t = a_t + n_periods * a_p
    return h_t, a_t
