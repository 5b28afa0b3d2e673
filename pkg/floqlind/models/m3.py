from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from floqlind.dynamics.lindblad import LindbladSpec

# (row, col) pairs, 1-based, of the fixed entries; Hermitian partners are filled in
_CONSTANT_ENTRIES = {(2, 2): 1.0, (7, 7): 1.0, (5, 5): 2.0, (7, 2): -1j}


def m3_kossakowski(t: float) -> np.ndarray:
    """8×8 Kossakowski matrix of the qutrit counterexample at time t."""
    c = math.cos(t)
    a = np.zeros((8, 8), dtype=np.complex128)
    entries = dict(_CONSTANT_ENTRIES)
    entries[(8, 8)] = 1.0 + c
    entries[(5, 2)] = -1j * c
    entries[(7, 5)] = c
    for (j, k), v in entries.items():
        a[j - 1, k - 1] = v
        a[k - 1, j - 1] = np.conj(v)
    return a


@dataclass(frozen=True, eq=False)
class M3CounterexampleModel:
    """
    2π-periodic qutrit dynamics with H = 0 whose generators do not commute.

    Λ_t stays CPTP and CP-divisible, while its Floquet factors P_t and e^{tX}
    fail complete positivity away from multiples of the period.
    """

    @property
    def period(self) -> float:
        return 2 * math.pi

    @cached_property
    def spec(self) -> LindbladSpec:
        def _hamiltonian(t: float) -> np.ndarray:
            return np.zeros((3, 3), dtype=np.complex128)

        return LindbladSpec(
            dim=3,
            period=self.period,
            hamiltonian=_hamiltonian,
            kossakowski=m3_kossakowski,
            name="m3-counterexample",
        )


def m3_counterexample() -> LindbladSpec:
    return M3CounterexampleModel().spec
