from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from floqlind.errors import DimensionMismatchError
from floqlind.linalg.basis import FrobeniusBasis
from floqlind.linalg.matfuncs import matrix_exp

logger = logging.getLogger(__name__)

MatrixMap = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class Superoperator:
    """
    Matrix W_jk = tr(F_j* Φ(F_k)) of a linear map Φ on d×d matrices,
    expressed in a Frobenius basis.
    """

    matrix: np.ndarray = field(repr=False)
    basis: FrobeniusBasis

    def __post_init__(self) -> None:
        n = self.basis.size
        if self.matrix.shape != (n, n):
            raise DimensionMismatchError(
                f"Superoperator matrix has shape {self.matrix.shape}, basis needs {(n, n)}"
            )

    @property
    def dim(self) -> int:
        return self.basis.dim

    def apply(self, x: np.ndarray) -> np.ndarray:
        return apply_superop(self, x)

    def __matmul__(self, other: Superoperator) -> Superoperator:
        return compose(self, other)

    def __add__(self, other: Superoperator) -> Superoperator:
        _check_same_basis(self, other)
        return Superoperator(self.matrix + other.matrix, self.basis)

    def __sub__(self, other: Superoperator) -> Superoperator:
        _check_same_basis(self, other)
        return Superoperator(self.matrix - other.matrix, self.basis)

    def scaled(self, factor: complex) -> Superoperator:
        return Superoperator(factor * self.matrix, self.basis)

    def exp(self) -> Superoperator:
        return Superoperator(matrix_exp(self.matrix), self.basis)


def _check_same_basis(a: Superoperator, b: Superoperator) -> None:
    if a.basis.dim != b.basis.dim:
        raise DimensionMismatchError(
            f"Cannot combine superoperators of dimension {a.dim} and {b.dim}"
        )


# ---------------------------------------------------------------------------
# construction
# ---------------------------------------------------------------------------


def superop_identity(basis: FrobeniusBasis) -> Superoperator:
    return Superoperator(np.eye(basis.size, dtype=np.complex128), basis)


def vectorize_map(apply: MatrixMap, basis: FrobeniusBasis) -> Superoperator:
    """Matrix of ``apply`` in ``basis``: W_jk = tr(F_j* apply(F_k))."""
    images = np.array([apply(f) for f in basis.elements])
    w = np.einsum("jab,kab->jk", basis.elements.conj(), images)
    return Superoperator(w, basis)


def devectorize_map(s: Superoperator) -> MatrixMap:
    """Inverse of `vectorize_map`: x ↦ Σ_j (Σ_k S_jk tr(F_k* x)) F_j."""

    def _apply(x: np.ndarray) -> np.ndarray:
        return apply_superop(s, x)

    return _apply


def apply_superop(s: Superoperator, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x)
    if x.shape != (s.dim, s.dim):
        raise DimensionMismatchError(
            f"Operand of shape {x.shape} does not match superoperator dimension {s.dim}"
        )
    return s.basis.from_coordinates(s.matrix @ s.basis.coordinates(x))


def compose(a: Superoperator, b: Superoperator) -> Superoperator:
    """a∘b, i.e. apply b first."""
    _check_same_basis(a, b)
    return Superoperator(a.matrix @ b.matrix, a.basis)


# ---------------------------------------------------------------------------
# structural residuals
# ---------------------------------------------------------------------------


def tp_residual(s: Superoperator) -> float:
    """Distance of the last row from the unit row (trace preservation)."""
    target = np.zeros(s.basis.size)
    target[-1] = 1.0
    return float(np.max(np.abs(s.matrix[-1] - target)))


def trace_annihilation_residual(s: Superoperator) -> float:
    return float(np.max(np.abs(s.matrix[-1])))


def star_residual(s: Superoperator) -> float:
    """Imaginary residual of the matrix; zero for *-maps in a Hermitian basis."""
    return float(np.max(np.abs(s.matrix.imag)))


# ---------------------------------------------------------------------------
# Choi and process matrices
# ---------------------------------------------------------------------------


def choi_matrix(s: Superoperator) -> np.ndarray:
    """C = Σ_ab E_ab ⊗ Φ(E_ab) (unnormalized)."""
    d = s.dim
    c = np.zeros((d * d, d * d), dtype=np.complex128)
    for a in range(d):
        for b in range(d):
            unit = np.zeros((d, d), dtype=np.complex128)
            unit[a, b] = 1.0
            c[a * d : (a + 1) * d, b * d : (b + 1) * d] = apply_superop(s, unit)
    return c


def _basis_vectors(basis: FrobeniusBasis) -> np.ndarray:
    # column j is F_j^T flattened, so that C = V p V^†
    return np.stack([f.T.ravel() for f in basis.elements], axis=1)


def process_matrix(s: Superoperator) -> np.ndarray:
    """Coefficients p_jk of Φ(x) = Σ_jk p_jk F_j x F_k*."""
    v = _basis_vectors(s.basis)
    return v.conj().T @ choi_matrix(s) @ v


@dataclass(frozen=True)
class MapDecomposition:
    """
    Φ(x) = E x + x E* + Σ_{j,k<d²} p_jk F_j x F_k*, with E = K' + iG split
    into Hermitian parts; for trace-preserving Φ, K' = I/2 − K.
    """

    process: np.ndarray
    corner: np.ndarray
    e: np.ndarray
    g: np.ndarray
    k: np.ndarray


def map_decomposition(s: Superoperator) -> MapDecomposition:
    d = s.dim
    p = process_matrix(s)
    basis = s.basis
    last = basis.size - 1
    e = (p[last, last] / (2 * d)) * np.eye(d, dtype=np.complex128)
    e = e + np.einsum("j,jab->ab", p[:last, last], basis.elements[:last]) / np.sqrt(d)
    g = (e - e.conj().T) / 2j
    m = (e + e.conj().T) / 2
    k = 0.5 * np.eye(d) - m
    return MapDecomposition(process=p, corner=p[:last, :last], e=e, g=g, k=k)
