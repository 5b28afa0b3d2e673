from __future__ import annotations

import logging
from typing import Literal

import numpy as np
import scipy.linalg
from scipy.optimize import linear_sum_assignment

from floqlind.errors import (
    BranchCutError,
    NonDiagonalizableError,
    NotHermitianError,
    NotSquareError,
    SingularMatrixError,
)

logger = logging.getLogger(__name__)

# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------


def _as_square(m: np.ndarray) -> np.ndarray:
    arr = np.asarray(m)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise NotSquareError(f"Expected a square matrix, got shape {arr.shape}")
    return arr.astype(np.complex128, copy=False)


def norm2(m: np.ndarray) -> float:
    """Spectral norm, 0 for empty input."""
    arr = np.asarray(m)
    if arr.size == 0:
        return 0.0
    return float(np.linalg.norm(arr, 2))


def _scale(m: np.ndarray) -> float:
    s = norm2(m)
    return s if s > 0 else 1.0


def hermitian_residual(m: np.ndarray) -> float:
    """max_ij |m_ij − conj(m_ji)|."""
    arr = _as_square(m)
    return float(np.max(np.abs(arr - arr.conj().T))) if arr.size else 0.0


def hermitian_part(m: np.ndarray) -> np.ndarray:
    arr = _as_square(m)
    return 0.5 * (arr + arr.conj().T)


def is_hermitian(m: np.ndarray, tol: float = 1e-10) -> bool:
    return hermitian_residual(m) <= tol * _scale(m)


def is_psd(m: np.ndarray, tol: float = 1e-9, tol_herm: float = 1e-10) -> bool:
    if not is_hermitian(m, tol_herm):
        return False
    return hermitian_min_eig(m, tol_herm) >= -tol * _scale(m)


# ---------------------------------------------------------------------------
# matrix functions
# ---------------------------------------------------------------------------


def matrix_exp(m: np.ndarray) -> np.ndarray:
    """Matrix exponential by scaling and squaring with Padé approximants."""
    arr = _as_square(m)
    return scipy.linalg.expm(arr)


def matrix_log(
    m: np.ndarray,
    *,
    tol: float = 1e-12,
    singular_tol: float = 1e-14,
    cond_max: float = 1e8,
    on_branch_cut: Literal["raise", "principal"] = "raise",
) -> np.ndarray:
    """
    Principal logarithm of a diagonalizable matrix via its eigendecomposition.

    Eigenvalue arguments of the result lie in (−π, π]. If the input is real,
    the output is projected onto the reals whenever no eigenvalue touches the
    branch cut.

    Parameters
    ----------
    m : array_like
        Square, invertible, diagonalizable matrix.
    tol : float
        Relative distance to the negative real axis that counts as "on the cut".
    singular_tol : float
        Eigenvalues with modulus below ``singular_tol * ||m||`` count as zero.
    cond_max : float
        Largest accepted condition number of the eigenvector matrix.
    on_branch_cut : {"raise", "principal"}
        "principal" assigns argument +π to eigenvalues on the cut.

    Raises
    ------
    SingularMatrixError, BranchCutError, NonDiagonalizableError
    """
    arr = _as_square(m)
    scale = norm2(arr)
    if scale == 0.0:
        raise SingularMatrixError("Logarithm of the zero matrix is undefined")

    w, v = scipy.linalg.eig(arr)
    smallest = float(np.min(np.abs(w)))
    if smallest <= singular_tol * scale:
        raise SingularMatrixError(
            f"Matrix is singular to tolerance (|lambda|_min = {smallest:.3e})"
        )

    cond = float(np.linalg.cond(v))
    if not np.isfinite(cond) or cond > cond_max:
        raise NonDiagonalizableError(
            f"Eigenvector matrix condition number {cond:.3e} exceeds {cond_max:.1e}"
        )

    on_cut = (w.real < 0) & (np.abs(w.imag) <= tol * np.abs(w))
    angles = np.angle(w)
    if np.any(on_cut):
        if on_branch_cut == "raise":
            raise BranchCutError(
                f"Eigenvalues {w[on_cut]} lie on the negative real axis"
            )
        logger.warning(
            "%d eigenvalue(s) on the negative real axis; using argument +pi",
            int(on_cut.sum()),
        )
        angles = np.where(on_cut, np.pi, angles)

    log_w = np.log(np.abs(w)) + 1j * angles
    x = np.linalg.solve(v.T, (v * log_w).T).T

    if not np.any(on_cut) and np.max(np.abs(arr.imag)) <= singular_tol * scale:
        x = x.real.astype(np.complex128)
    return x


def hermitian_min_eig(m: np.ndarray, tol: float = 1e-10) -> float:
    """
    Minimum eigenvalue of (M+M*)/2.

    Raises
    ------
    NotHermitianError
        If max |m_ij − conj(m_ji)| exceeds ``tol * ||M||``.
    """
    arr = _as_square(m)
    residual = hermitian_residual(arr)
    if residual > tol * _scale(arr):
        raise NotHermitianError(f"Hermiticity residual {residual:.3e} above tolerance")
    return float(np.linalg.eigvalsh(hermitian_part(arr))[0])


# ---------------------------------------------------------------------------
# spectra
# ---------------------------------------------------------------------------


def match_multisets(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Permutation p minimizing sum |a_i − b_{p(i)}| (Hungarian assignment)."""
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    cost = np.abs(a[:, None] - b[None, :])
    rows, cols = linear_sum_assignment(cost)
    perm = np.empty(len(a), dtype=int)
    perm[rows] = cols
    return perm


def conjugation_mismatch(values: np.ndarray) -> float:
    """
    Distance of a multiset of complex numbers from being closed under
    conjugation: max_i |conj(v_i) − v_{p(i)}| over the best pairing p.
    """
    vals = np.asarray(values, dtype=np.complex128).ravel()
    if vals.size == 0:
        return 0.0
    perm = match_multisets(vals.conj(), vals)
    return float(np.max(np.abs(vals.conj() - vals[perm])))
