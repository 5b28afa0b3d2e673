from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from floqlind.linalg.matfuncs import hermitian_part, hermitian_residual, norm2
from floqlind.linalg.superop import Superoperator, choi_matrix, star_residual, tp_residual
from floqlind.utils.options import Tolerances

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CPReport:
    """
    Complete-positivity verdict of a single map.

    ``min_choi_eig`` is the smallest eigenvalue of the Hermitian part of the
    Choi matrix; ``witness`` is the matching eigenvector when ``cp`` fails.
    A Choi matrix that is not Hermitian (the map is not a *-map) never
    certifies as CP.
    """

    cp: bool
    min_choi_eig: float
    tp_residual: float
    star_residual: float
    choi_norm: float
    choi_eigenvalues: np.ndarray
    witness: np.ndarray | None = None

    def is_tp(self, tol: float = 1e-9) -> bool:
        return self.tp_residual <= tol

    def is_cptp(self, tol: float = 1e-9) -> bool:
        return self.cp and self.is_tp(tol)


def cptp_report(s: Superoperator, tol: Tolerances = Tolerances()) -> CPReport:
    """Choi PSD test, TP row test and realness (*-map) test of ``s``."""
    choi = choi_matrix(s)
    scale = norm2(choi) or 1.0
    herm_res = hermitian_residual(choi)
    w, v = np.linalg.eigh(hermitian_part(choi))
    min_eig = float(w[0])
    hermitian = herm_res <= tol.herm * scale
    cp = bool(hermitian and min_eig >= -tol.psd * scale)
    if not hermitian:
        logger.debug("Choi matrix not Hermitian (residual %.3e); map is not a *-map", herm_res)
    return CPReport(
        cp=cp,
        min_choi_eig=min_eig,
        tp_residual=tp_residual(s),
        star_residual=star_residual(s),
        choi_norm=scale,
        choi_eigenvalues=w,
        witness=None if cp else v[:, 0],
    )
