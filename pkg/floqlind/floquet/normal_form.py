from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from floqlind.dynamics.lindblad import LindbladSpec, assemble_generator, is_commutative
from floqlind.dynamics.quadrature import antiderivatives, period_integrals
from floqlind.dynamics.solver import PropagatorTrajectory, integrate_general
from floqlind.errors import NotCommutativeError
from floqlind.linalg.matfuncs import match_multisets, matrix_exp, matrix_log
from floqlind.linalg.superop import Superoperator, superop_identity
from floqlind.utils.options import FloquetOptions, Tolerances

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class FloquetForm:
    """
    Floquet normal form Λ_t = P_t e^{tX} of a periodic Lindblad evolution.

    ``eigvecs[j]`` is the d×d matrix φ_j with X(φ_j) = μ_j φ_j, normalized to
    unit Frobenius norm with its largest-magnitude entry real positive.
    Indices are 0-based.
    """

    spec: LindbladSpec
    mode: Literal["commutative", "general-log"]
    X: Superoperator
    monodromy: Superoperator
    multipliers: np.ndarray
    exponents: np.ndarray
    eigvecs: list[np.ndarray] = field(repr=False)
    eigvec_coords: np.ndarray | None = field(repr=False)
    diagonalizable: bool
    monodromy_mismatch: float = 0.0
    tolerances: Tolerances = Tolerances()
    trajectory: PropagatorTrajectory | None = field(default=None, repr=False)

    @property
    def period(self) -> float:
        return self.spec.period

    def semigroup(self, t: float) -> Superoperator:
        """e^{tX}."""
        return Superoperator(matrix_exp(t * self.X.matrix), self.spec.basis)

    def periodic_part(self, t: float) -> Superoperator:
        """P_t, evaluated at t mod T."""
        period = self.period
        tau = t - math.floor(t / period) * period
        if tau <= 0.0 or math.isclose(tau, period, rel_tol=1e-14, abs_tol=1e-14):
            return superop_identity(self.spec.basis)
        if self.mode == "commutative":
            h_t, a_t = antiderivatives(self.spec, tau, abs_tol=self.tolerances.quad_abs)
            h_p, a_p = period_integrals(self.spec, self.tolerances.quad_abs)
            frac = tau / period
            gen = assemble_generator(h_t - frac * h_p, a_t - frac * a_p, self.spec.basis)
            return gen.exp()
        lam = self.trajectory.at(tau)
        return Superoperator(lam.matrix @ matrix_exp(-tau * self.X.matrix), self.spec.basis)

    def propagator(self, t: float) -> Superoperator:
        """Λ_t = P_t e^{tX}."""
        return self.periodic_part(t) @ self.semigroup(t)


# ---------------------------------------------------------------------------
# Eigen-data
# ---------------------------------------------------------------------------


def _normalize_eigvec(coords: np.ndarray, basis) -> tuple[np.ndarray, np.ndarray]:
    coords = coords / np.linalg.norm(coords)
    phi = basis.from_coordinates(coords)
    flat = phi.ravel()
    mags = np.abs(flat)
    # first entry within rounding of the largest magnitude
    idx = int(np.argmax(mags >= (1 - 1e-9) * mags.max()))
    phase = flat[idx] / mags[idx]
    return coords / phase, phi / phase


def _spectral_data(
    x: Superoperator, monodromy: Superoperator, period: float, tol: Tolerances
) -> dict:
    mu, vecs = np.linalg.eig(x.matrix)
    order = np.lexsort((-mu.imag, -mu.real))
    mu, vecs = mu[order], vecs[:, order]
    cond = float(np.linalg.cond(vecs))
    diagonalizable = bool(np.isfinite(cond) and cond <= tol.cond_max)
    if not diagonalizable:
        logger.warning("X is defective within tolerance (eigenvector condition %.3e)", cond)

    lam = np.exp(mu * period)
    lam_direct = np.linalg.eigvals(monodromy.matrix)
    perm = match_multisets(lam, lam_direct)
    mismatch = float(np.max(np.abs(lam - lam_direct[perm])))
    logger.debug("Multiplier mismatch between e^{mu T} and spec(Lambda_T): %.3e", mismatch)

    coords_list, phis = [], []
    for j in range(len(mu)):
        c, phi = _normalize_eigvec(vecs[:, j], x.basis)
        coords_list.append(c)
        phis.append(phi)
    coords = np.stack(coords_list, axis=1) if diagonalizable else None
    return dict(
        exponents=mu,
        multipliers=lam,
        eigvecs=phis,
        eigvec_coords=coords,
        diagonalizable=diagonalizable,
        monodromy_mismatch=mismatch,
    )


# ---------------------------------------------------------------------------
# Split
# ---------------------------------------------------------------------------


def _commutative_split(spec: LindbladSpec, options: FloquetOptions) -> FloquetForm:
    h_p, a_p = period_integrals(spec, options.tolerances.quad_abs)
    x = assemble_generator(h_p / spec.period, a_p / spec.period, spec.basis)
    monodromy = Superoperator(matrix_exp(spec.period * x.matrix), spec.basis)
    data = _spectral_data(x, monodromy, spec.period, options.tolerances)
    return FloquetForm(
        spec=spec,
        mode="commutative",
        X=x,
        monodromy=monodromy,
        tolerances=options.tolerances,
        **data,
    )


def _general_split(spec: LindbladSpec, options: FloquetOptions) -> FloquetForm:
    trajectory = integrate_general(
        spec, spec.period, options.integrator.step, options.integrator, options.tolerances
    )
    monodromy = trajectory.final
    log_m = matrix_log(
        monodromy.matrix,
        cond_max=options.tolerances.cond_max,
        on_branch_cut=options.branch_cut,
    )
    x = Superoperator(log_m / spec.period, spec.basis)
    data = _spectral_data(x, monodromy, spec.period, options.tolerances)
    return FloquetForm(
        spec=spec,
        mode="general-log",
        X=x,
        monodromy=monodromy,
        tolerances=options.tolerances,
        trajectory=trajectory,
        **data,
    )


def floquet_split(spec: LindbladSpec, options: FloquetOptions = FloquetOptions()) -> FloquetForm:
    """
    Factor Λ_t = P_t e^{tX} with P_t periodic.

    In commutative mode X = (1/T)∫₀ᵀ L dt and P_t has a closed form; in
    general-log mode X = log(Λ_T)/T with Λ_T from the numerical integrator.
    "auto" uses the commutative mode iff the sampled commutator residual is
    within tolerance.

    Raises
    ------
    NotCommutativeError
        Commutative mode requested for a non-commuting family.
    BranchCutError, NonDiagonalizableError, SingularMatrixError
        From the logarithm in general-log mode.
    """
    mode = options.mode
    if mode == "auto":
        mode = (
            "commutative"
            if is_commutative(spec, options.comm_grid, options.tolerances)
            else "general-log"
        )
    elif mode == "commutative" and not is_commutative(spec, options.comm_grid, options.tolerances):
        raise NotCommutativeError(f"Generators of {spec.name} do not commute on the sample grid")

    logger.info("Floquet split of %s in %s mode", spec.name, mode)
    if mode == "commutative":
        return _commutative_split(spec, options)
    return _general_split(spec, options)
