from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from floqlind.dynamics.lindblad import LindbladSpec, extract_standard_form
from floqlind.dynamics.solver import midpoint_propagator
from floqlind.errors import DecompositionError, FiniteDifferenceError
from floqlind.floquet.normal_form import FloquetForm
from floqlind.linalg.matfuncs import hermitian_part, matrix_exp, norm2
from floqlind.linalg.superop import Superoperator, process_matrix
from floqlind.utils.options import Tolerances

logger = logging.getLogger(__name__)

# relative disagreement between the h and h/2 difference quotients that
# signals a kink at t=0
_KINK_RATIO = 1e-4


@dataclass(frozen=True)
class SemigroupTestResult:
    markovian: bool
    condition_matrix: np.ndarray
    min_eig: float
    standard_form_valid: bool | None
    one_sided: bool
    agrees: bool


def _periodic_part_near_zero(form: FloquetForm, spec: LindbladSpec, h: float, step: float) -> np.ndarray:
    # P_h = Λ_h e^{−hX}, with Λ_h stepped directly from 0 (h may be negative)
    lam = midpoint_propagator(spec, 0.0, h, step)
    return lam.matrix @ matrix_exp(-h * form.X.matrix)


def _difference_quotient(form: FloquetForm, spec: LindbladSpec, h: float, one_sided: bool) -> np.ndarray:
    step = abs(h)
    if one_sided:
        p0 = np.eye(spec.basis.size)
        p1 = _periodic_part_near_zero(form, spec, h, step)
        p2 = _periodic_part_near_zero(form, spec, 2 * h, step)
        return (-3 * p0 + 4 * p1 - p2) / (2 * h)
    plus = _periodic_part_near_zero(form, spec, h, step)
    minus = _periodic_part_near_zero(form, spec, -h, step)
    return (plus - minus) / (2 * h)


def periodic_part_derivative(
    form: FloquetForm, spec: LindbladSpec, h_rel: float = 1e-5
) -> tuple[Superoperator, bool]:
    """
    dP_t/dt at t=0 by Richardson-refined finite differences with step
    ``h_rel``·T. Central differences are used unless 0 is a breakpoint.

    Raises
    ------
    FiniteDifferenceError
        If the refined quotients disagree (P_t is not differentiable at 0).
    """
    h = h_rel * spec.period
    one_sided = 0.0 in spec.breakpoints
    coarse = _difference_quotient(form, spec, h, one_sided)
    fine = _difference_quotient(form, spec, h / 2, one_sided)
    order = 2
    refined = (2**order * fine - coarse) / (2**order - 1)
    spread = float(np.max(np.abs(fine - coarse)))
    scale = max(norm2(refined), 1.0)
    if not np.all(np.isfinite(refined)) or spread > _KINK_RATIO * scale:
        raise FiniteDifferenceError(
            f"dP/dt at 0 not resolved for {spec.name}: quotient spread {spread:.3e}"
        )
    return Superoperator(refined, spec.basis), one_sided


def semigroup_cp_test(
    form: FloquetForm,
    spec: LindbladSpec,
    h_rel: float = 1e-5,
    tol: Tolerances = Tolerances(),
    psd_tol: float = 1e-7,
) -> SemigroupTestResult:
    """
    Decide whether e^{tX} is a CP contraction semigroup from a_0 − dP̃/dt|₀ ⪰ 0,
    where P̃ is the upper-left (d²−1)² block of the process matrix of P_t.

    The verdict is cross-checked against the standard form of X itself; a
    disagreement is logged.
    """
    dp, one_sided = periodic_part_derivative(form, spec, h_rel)
    n = spec.n_channels
    a0 = np.asarray(spec.kossakowski(0.0), dtype=np.complex128)
    cond = hermitian_part(a0 - process_matrix(dp)[:n, :n])
    min_eig = float(np.linalg.eigvalsh(cond)[0])
    markovian = min_eig >= -psd_tol * max(norm2(cond), 1.0)

    try:
        valid: bool | None = extract_standard_form(form.X, tol).gksl_valid
    except DecompositionError as e:
        logger.debug("X has no standard form: %s", e)
        valid = False
    agrees = valid == markovian
    if not agrees:
        logger.warning(
            "Semigroup test for %s disagrees with the standard form of X (min eig %.3e)",
            spec.name, min_eig,
        )
    return SemigroupTestResult(
        markovian=bool(markovian),
        condition_matrix=cond,
        min_eig=min_eig,
        standard_form_valid=valid,
        one_sided=one_sided,
        agrees=agrees,
    )
