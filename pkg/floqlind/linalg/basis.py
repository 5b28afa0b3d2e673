from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from floqlind.errors import InvalidDimensionError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class FrobeniusBasis:
    """
    Orthonormal Hermitian operator basis F_1..F_{d²} with F_{d²} = I/√d.

    ``elements`` has shape (d², d, d). Instances are cached per dimension by
    `frobenius_basis`, so identity comparison is meaningful.
    """

    dim: int
    elements: np.ndarray = field(repr=False)

    @property
    def size(self) -> int:
        return self.dim * self.dim

    def __len__(self) -> int:
        return self.size

    def __getitem__(self, j: int) -> np.ndarray:
        return self.elements[j]

    def coordinates(self, x: np.ndarray) -> np.ndarray:
        """Return the vector tr(F_j* x), j = 1..d²."""
        return np.einsum("jab,ab->j", self.elements.conj(), x)

    def from_coordinates(self, c: np.ndarray) -> np.ndarray:
        return np.einsum("j,jab->ab", c, self.elements)

    def gram(self) -> np.ndarray:
        flat = self.elements.reshape(self.size, -1)
        return flat.conj() @ flat.T


def _gell_mann_elements(d: int) -> np.ndarray:
    pairs = list(itertools.combinations(range(d), 2))
    mats = []
    # symmetric pairs, row-major
    for j, k in pairs:
        m = np.zeros((d, d), dtype=np.complex128)
        m[j, k] = m[k, j] = 1.0
        mats.append(m / np.sqrt(2))
    # antisymmetric pairs, same order
    for j, k in pairs:
        m = np.zeros((d, d), dtype=np.complex128)
        m[j, k] = -1j
        m[k, j] = 1j
        mats.append(m / np.sqrt(2))
    # diagonal family diag(1, .., 1, -l, 0, ..)
    for level in range(1, d):
        diag = np.zeros(d)
        diag[:level] = 1.0
        diag[level] = -level
        mats.append(np.diag(diag).astype(np.complex128) / np.sqrt(level * (level + 1)))
    mats.append(np.eye(d, dtype=np.complex128) / np.sqrt(d))
    return np.array(mats)


@lru_cache(maxsize=None)
def frobenius_basis(d: int) -> FrobeniusBasis:
    """
    Build the Frobenius-orthonormal Gell-Mann basis of dimension ``d``.

    For d=2 this is σ_1/√2, σ_2/√2, σ_3/√2, I/√2; for d=3 the eight normalized
    Gell-Mann matrices ordered (symmetric, antisymmetric, diagonal) followed
    by I/√3. Larger d follow the same ordering.

    Raises
    ------
    InvalidDimensionError
        If d < 2.
    """
    if not isinstance(d, (int, np.integer)) or d < 2:
        raise InvalidDimensionError(f"Basis dimension must be an integer >= 2, got {d!r}")
    elements = _gell_mann_elements(int(d))
    elements.setflags(write=False)
    logger.debug("Built Frobenius basis for d=%d", d)
    return FrobeniusBasis(dim=int(d), elements=elements)


# Pauli matrices, used by the qubit models and tests.
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
SIGMA_PLUS = np.array([[0, 1], [0, 0]], dtype=np.complex128)
SIGMA_MINUS = np.array([[0, 0], [1, 0]], dtype=np.complex128)
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)
