from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from floqlind.errors import InvalidDensityMatrixError, NonDiagonalizableError
from floqlind.floquet.normal_form import FloquetForm
from floqlind.linalg.matfuncs import hermitian_part, is_psd
from floqlind.linalg.superop import apply_superop

logger = logging.getLogger(__name__)

CLASS_DECAYING = "decaying"
CLASS_PERIODIC = "periodic"
CLASS_ANTI_PERIODIC = "anti-periodic"
CLASS_PSEUDO_PERIODIC = "pseudo-periodic"
CLASS_UNSTABLE = "unstable"


@dataclass(frozen=True)
class StabilityReport:
    """
    Classification of the characteristic multipliers.

    ``partition`` maps "E1e" (λ = 1), "E1o" (λ = −1), "E2" (other unit-circle
    multipliers) and "E3" (|λ| < 1) to 0-based exponent indices.
    """

    classes: list[str]
    partition: dict[str, list[int]]
    unstable: list[int]
    periodic_limit_exists: bool
    eigvec_checks: dict[str, bool] = field(default_factory=dict)


def classify_multiplier(lam: complex, tol: float = 1e-8) -> str:
    r = abs(lam)
    if r < 1 - tol:
        return CLASS_DECAYING
    if r > 1 + tol:
        return CLASS_UNSTABLE
    if abs(lam - 1) <= tol:
        return CLASS_PERIODIC
    if abs(lam + 1) <= tol:
        return CLASS_ANTI_PERIODIC
    return CLASS_PSEUDO_PERIODIC


_PARTITION_KEY = {
    CLASS_PERIODIC: "E1e",
    CLASS_ANTI_PERIODIC: "E1o",
    CLASS_PSEUDO_PERIODIC: "E2",
    CLASS_DECAYING: "E3",
}


def _eigvec_checks(form: FloquetForm, tol: float) -> dict[str, bool]:
    lam = form.multipliers
    phis = form.eigvecs
    not_one = [j for j in range(len(lam)) if abs(lam[j] - 1) > tol]
    ones = [j for j in range(len(lam)) if abs(lam[j] - 1) <= tol]

    traceless = all(abs(np.trace(phis[j])) <= tol for j in not_one)
    not_psd = all(not is_psd(hermitian_part(phis[j]), tol=tol) for j in not_one)
    some_state = any(is_psd(hermitian_part(phis[j]), tol=tol) and
                     np.max(np.abs(phis[j] - phis[j].conj().T)) <= 1e-6 for j in ones)
    tp_condition = all(abs((1 - lam[j]) * np.trace(phis[j])) <= tol for j in range(len(lam)))

    pairing = True
    x = form.X
    for j, phi in enumerate(phis):
        star = phi.conj().T
        image = apply_superop(x, star)
        pairing &= bool(np.linalg.norm(image - np.conj(form.exponents[j]) * star)
                        <= tol * max(1.0, np.linalg.norm(x.matrix)))
    checks = {
        "traceless_off_one": bool(traceless),
        "not_psd_off_one": bool(not_psd),
        "state_at_one": bool(some_state),
        "trace_preservation": bool(tp_condition),
        "conjugate_pairing": bool(pairing),
    }
    failed = [k for k, v in checks.items() if not v]
    if failed:
        logger.warning("Floquet eigenvector checks failed: %s", ", ".join(failed))
    return checks


def characteristic_spectrum(
    form: FloquetForm, tol: float = 1e-8
) -> tuple[np.ndarray, np.ndarray, list[np.ndarray], StabilityReport]:
    """
    Multipliers λ_j, exponents μ_j, eigenvectors φ_j and their stability
    classification. Eigenvector checks are skipped for defective forms.
    """
    classes = [classify_multiplier(lam, tol) for lam in form.multipliers]
    partition: dict[str, list[int]] = {"E1e": [], "E1o": [], "E2": [], "E3": []}
    unstable = []
    for j, cls in enumerate(classes):
        if cls == CLASS_UNSTABLE:
            unstable.append(j)
        else:
            partition[_PARTITION_KEY[cls]].append(j)
    if unstable:
        logger.warning("Unstable multipliers %s", [form.multipliers[j] for j in unstable])
    periodic = not partition["E1o"] and not partition["E2"]
    checks = _eigvec_checks(form, max(tol, 1e-9) * 10) if form.diagonalizable else {}
    report = StabilityReport(
        classes=classes,
        partition=partition,
        unstable=unstable,
        periodic_limit_exists=periodic,
        eigvec_checks=checks,
    )
    return form.multipliers, form.exponents, form.eigvecs, report


# ---------------------------------------------------------------------------
# Solutions in the Floquet basis
# ---------------------------------------------------------------------------


def _require_diagonalizable(form: FloquetForm) -> np.ndarray:
    if not form.diagonalizable or form.eigvec_coords is None:
        raise NonDiagonalizableError("Floquet form is not diagonalizable; no eigenbasis expansion")
    return form.eigvec_coords


def check_density_matrix(rho: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    rho = np.asarray(rho, dtype=np.complex128)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise InvalidDensityMatrixError(f"Density matrix must be square, got {rho.shape}")
    if np.max(np.abs(rho - rho.conj().T)) > tol:
        raise InvalidDensityMatrixError("Density matrix is not Hermitian")
    if abs(np.trace(rho) - 1) > tol:
        raise InvalidDensityMatrixError(f"Density matrix trace {np.trace(rho).real} != 1")
    if np.linalg.eigvalsh(hermitian_part(rho))[0] < -tol:
        raise InvalidDensityMatrixError("Density matrix is not positive semi-definite")
    return rho


def expansion_coefficients(form: FloquetForm, rho0: np.ndarray) -> np.ndarray:
    """c_j with ρ₀ = Σ c_j φ_j (the φ_j are generally not orthogonal)."""
    coords = _require_diagonalizable(form)
    return np.linalg.solve(coords, form.spec.basis.coordinates(np.asarray(rho0, dtype=np.complex128)))


def floquet_states(form: FloquetForm, j: int, t: float) -> np.ndarray:
    """φ_j(t) = P_t(φ_j); ρ_j(t) = e^{μ_j t} φ_j(t) solves the master equation."""
    _require_diagonalizable(form)
    if not 0 <= j < len(form.eigvecs):
        raise IndexError(f"Floquet state index {j} out of range 0..{len(form.eigvecs) - 1}")
    return apply_superop(form.periodic_part(t), form.eigvecs[j])


def general_solution(form: FloquetForm, rho0: np.ndarray, t: float) -> np.ndarray:
    """ρ_t = Σ_j c_j e^{μ_j t} P_t(φ_j)."""
    c = expansion_coefficients(form, rho0)
    p_t = form.periodic_part(t)
    out = np.zeros_like(form.eigvecs[0])
    for cj, mu, phi in zip(c, form.exponents, form.eigvecs):
        out = out + cj * np.exp(mu * t) * apply_superop(p_t, phi)
    return out


@dataclass(frozen=True)
class AsymptoticState:
    """ρ∞_t = Σ_{μ_j ∉ E3} c_j e^{μ_j t} P_t(φ_j) together with its flags."""

    form: FloquetForm = field(repr=False)
    coefficients: np.ndarray
    indices: list[int]
    periodic: bool
    decay_rate: float

    def __call__(self, t: float) -> np.ndarray:
        p_t = self.form.periodic_part(t)
        out = np.zeros_like(self.form.eigvecs[0])
        for j in self.indices:
            phi_t = apply_superop(p_t, self.form.eigvecs[j])
            out = out + self.coefficients[j] * np.exp(self.form.exponents[j] * t) * phi_t
        return out


def asymptotic_state(form: FloquetForm, rho0: np.ndarray, tol: float = 1e-8) -> AsymptoticState:
    """
    Asymptotic limit cycle reached from ``rho0``.

    ``decay_rate`` is min |Re μ_j| over E3 (inf if E3 is empty); ``periodic``
    holds iff no multiplier lies on the unit circle away from 1.

    Raises
    ------
    InvalidDensityMatrixError, NonDiagonalizableError
    """
    rho0 = check_density_matrix(rho0)
    c = expansion_coefficients(form, rho0)
    _, _, _, report = characteristic_spectrum(form, tol)
    decaying = report.partition["E3"]
    keep = [j for j in range(len(c)) if j not in decaying and j not in report.unstable]
    rate = min((abs(form.exponents[j].real) for j in decaying), default=math.inf)
    return AsymptoticState(
        form=form,
        coefficients=c,
        indices=keep,
        periodic=report.periodic_limit_exists,
        decay_rate=float(rate),
    )


def fit_decay(
    form: FloquetForm,
    rho0: np.ndarray,
    periods: Iterable[int] = (1, 2, 3, 4, 5),
    floor: float = 1e-13,
) -> tuple[float, float]:
    """
    Fit ‖ρ_t − ρ∞_t‖₁ ≈ A e^{−a t} at stroboscopic times t = nT.

    Points below ``floor`` are dropped as rounding noise. Returns (a, A);
    (inf, 0) when ρ₀ already sits on the limit cycle.
    """
    limit = asymptotic_state(form, rho0)
    period = form.period
    times, logs = [], []
    for n in periods:
        t = n * period
        rho_t = np.linalg.matrix_power(form.monodromy.matrix, n) @ form.spec.basis.coordinates(rho0)
        diff = form.spec.basis.from_coordinates(rho_t) - limit(t)
        dist = float(np.linalg.norm(diff, "nuc"))
        if dist > floor:
            times.append(t)
            logs.append(math.log(dist))
    if len(times) < 2:
        return math.inf, 0.0
    slope, intercept = np.polyfit(times, logs, 1)
    return float(-slope), float(math.exp(intercept))
