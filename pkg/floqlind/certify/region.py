"""
Complete-positivity geometry of the random qubit periodic part.

For P_t with Pauli-diagonal matrix diag(α₂α₃, α₁α₃, α₁α₂, 1), α_j = e^{−ϑ_j},
CP is decided three equivalent ways: the closed-form log-cosh/log-sinh
bounds on ϑ (regions A1..A3), the linear inequalities in α (regions B1..B3)
and the spectrum of the 4×4 Choi matrix.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

_LN2 = math.log(2.0)


def _log_cosh(u: float) -> float:
    u = abs(u)
    return u + math.log1p(math.exp(-2.0 * u)) - _LN2


def _log_sinh(u: float) -> float:
    # u > 0
    return u + math.log1p(-math.exp(-2.0 * u)) - _LN2


def _theta(theta: Sequence[float]) -> tuple[float, float, float]:
    x, y, z = (float(v) for v in theta)
    if not all(math.isfinite(v) for v in (x, y, z)):
        raise ValueError(f"theta must be finite, got {(x, y, z)}")
    return x, y, z


def boundary_cosh(x: float, y: float) -> float:
    """Lower z-bound of A1: ln(cosh((x−y)/2) / cosh((x+y)/2))."""
    return _log_cosh(0.5 * (x - y)) - _log_cosh(0.5 * (x + y))


def boundary_sinh(x: float, y: float) -> float:
    """Lower z-bound of A2 (x > 0 > y, x + y > 0): ln(sinh((x−y)/2) / sinh((x+y)/2))."""
    return _log_sinh(0.5 * abs(x - y)) - _log_sinh(0.5 * (x + y))


def region_A_membership(theta: Sequence[float], tol: float = 0.0) -> tuple[bool, str]:
    """
    Whether ϑ = (x, y, z) lies in A = A1 ∪ A2 ∪ A3, and which subregion.

    ``tol`` loosens every inequality by an absolute amount.
    """
    x, y, z = _theta(theta)
    if x >= -tol and y >= -tol:
        if z >= boundary_cosh(max(x, 0.0), max(y, 0.0)) - tol:
            return True, "A1"
        return False, "none"
    s = x + y
    if s <= tol:
        # z-bound diverges as x + y -> 0+
        return False, "none"
    if x > 0 > y:
        return (True, "A2") if z >= boundary_sinh(x, y) - tol else (False, "none")
    if y > 0 > x:
        return (True, "A3") if z >= boundary_sinh(y, x) - tol else (False, "none")
    return False, "none"


def alpha_inequalities(alpha: Sequence[float], tol: float = 0.0) -> bool:
    """The four bilinear inequalities in α that encode a PSD Choi matrix."""
    a1, a2, a3 = (float(v) for v in alpha)
    p12, p13, p23 = a1 * a2, a1 * a3, a2 * a3
    return (
        p12 + p13 - p23 <= 1 + tol
        and p12 - p13 + p23 <= 1 + tol
        and -p12 + p13 + p23 <= 1 + tol
        and -p12 - p13 - p23 <= 1 + tol
    )


def region_B_membership(alpha: Sequence[float], tol: float = 0.0) -> tuple[bool, str]:
    """Membership of α = e^{−ϑ} (componentwise, all positive) in B1 ∪ B2 ∪ B3."""
    a1, a2, a3 = (float(v) for v in alpha)
    if min(a1, a2, a3) <= 0:
        raise ValueError(f"alpha entries must be positive, got {(a1, a2, a3)}")
    p = a1 * a2
    if a1 <= 1 + tol and a2 <= 1 + tol:
        return (True, "B1") if a3 <= (1 + p) / (a1 + a2) + tol else (False, "none")
    if p >= 1 - tol:
        return False, "none"
    if a1 < 1 < a2:
        return (True, "B2") if a3 <= (1 - p) / (a2 - a1) + tol else (False, "none")
    if a1 > 1 > a2:
        return (True, "B3") if a3 <= (1 - p) / (a1 - a2) + tol else (False, "none")
    return False, "none"


def random_qubit_choi(theta: Sequence[float]) -> np.ndarray:
    """
    Choi matrix Σ E_ab ⊗ P(E_ab) of the random qubit periodic part at offsets ϑ.

    Its spectrum is {ξ₁ ± χ₁, ξ₂ ± χ₂}.
    """
    x, y, z = _theta(theta)
    a1, a2, a3 = math.exp(-x), math.exp(-y), math.exp(-z)
    xi1, xi2 = 0.5 * (1 + a1 * a2), 0.5 * (1 - a1 * a2)
    chi1, chi2 = 0.5 * (a1 * a3 + a2 * a3), 0.5 * (a1 * a3 - a2 * a3)
    return np.array(
        [
            [xi1, 0, 0, chi1],
            [0, xi2, -chi2, 0],
            [0, -chi2, xi2, 0],
            [chi1, 0, 0, xi1],
        ],
        dtype=float,
    )


def choi_oracle(theta: Sequence[float]) -> float:
    """Smallest Choi eigenvalue of the random qubit periodic part at ϑ."""
    return float(np.linalg.eigvalsh(random_qubit_choi(theta))[0])


def region_a_boundary(xs: Sequence[float], ys: Sequence[float]) -> np.ndarray:
    """
    Samples (x, y, z) of the lower A1 boundary surface z = F(x, y) over the
    grid xs × ys (non-negative coordinates only), one row per point.
    """
    rows = []
    for x in xs:
        for y in ys:
            if x < 0 or y < 0:
                raise ValueError("boundary samples need x, y >= 0")
            rows.append((float(x), float(y), boundary_cosh(float(x), float(y))))
    return np.array(rows, dtype=float).reshape(-1, 3)
