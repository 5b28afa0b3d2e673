from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from floqlind.certify.region import region_A_membership
from floqlind.dynamics.lindblad import LindbladSpec
from floqlind.errors import InvalidModelError
from floqlind.linalg.basis import PAULIS
from floqlind.linalg.superop import Superoperator
from floqlind.models.families import Constant, CoefficientFamily, RaisedCosine, merged_breakpoints

logger = logging.getLogger(__name__)

# Pauli index pairs (k, l) whose rates damp σ_j, j = 1, 2, 3
_DAMPING_PAIRS = ((1, 2), (0, 2), (0, 1))


@dataclass(frozen=True, eq=False)
class RandomQubitModel:
    """
    Pauli-channel dynamics dρ/dt = ½ Σ_j γ_j(t)(σ_j ρ σ_j − ρ).

    Over F_j = σ_j/√2 the Kossakowski matrix is diag(γ₁, γ₂, γ₃) and every
    map of the problem is diagonal in the Frobenius basis.
    """

    rates: tuple[CoefficientFamily, CoefficientFamily, CoefficientFamily]
    period: float = 2 * math.pi

    def __post_init__(self) -> None:
        if len(self.rates) != 3:
            raise InvalidModelError(f"Random qubit model needs 3 rates, got {len(self.rates)}")
        for j, rate in enumerate(self.rates, start=1):
            if not math.isclose(rate.period, self.period, rel_tol=1e-12):
                raise InvalidModelError(
                    f"gamma_{j} has period {rate.period}, model period is {self.period}"
                )
            if rate.minimum < 0:
                raise InvalidModelError(f"gamma_{j} takes negative values (min {rate.minimum})")

    @cached_property
    def spec(self) -> LindbladSpec:
        rates = self.rates

        def _hamiltonian(t: float) -> np.ndarray:
            return np.zeros((2, 2), dtype=np.complex128)

        def _kossakowski(t: float) -> np.ndarray:
            return np.diag([complex(g(t)) for g in rates])

        return LindbladSpec(
            dim=2,
            period=self.period,
            hamiltonian=_hamiltonian,
            kossakowski=_kossakowski,
            breakpoints=merged_breakpoints(rates),
            name="random-qubit",
        )

    # -- integrated rates ---------------------------------------------------

    def big_gamma(self, t: float) -> np.ndarray:
        """(Γ₁(t), Γ₂(t), Γ₃(t)) with Γ_j(t) = ∫₀ᵗ γ_j."""
        return np.array([g.integral(t) for g in self.rates])

    def damping(self, t: float) -> np.ndarray:
        """(Γ₂,₃(t), Γ₁,₃(t), Γ₁,₂(t))."""
        g = self.big_gamma(t)
        return np.array([g[k] + g[l] for k, l in _DAMPING_PAIRS])

    def theta(self, t: float) -> np.ndarray:
        """ϑ_j(t) = Γ_j(t) − tΓ_j(T)/T."""
        return self.big_gamma(t) - (t / self.period) * self.big_gamma(self.period)

    def theta_pair(self, j: int, k: int, t: float) -> float:
        """ϑ_{j,k}(t) = ϑ_j(t) + ϑ_k(t), 1-based indices."""
        th = self.theta(t)
        return float(th[j - 1] + th[k - 1])

    def xi_chi(self, t: float) -> tuple[float, float, float, float]:
        """(ξ₁, ξ₂, χ₁, χ₂) of the periodic part P_t."""
        a1, a2, a3 = np.exp(-self.theta(t))
        return 0.5 * (1 + a1 * a2), 0.5 * (1 - a1 * a2), 0.5 * (a1 * a3 + a2 * a3), 0.5 * (a1 * a3 - a2 * a3)

    def beta(self) -> tuple[float, float, float]:
        """(β₁, β₂, β₃) of X in matrix-entry form."""
        g1, g2, g3 = self.big_gamma(self.period)
        t2 = 2 * self.period
        return (g1 + g2) / t2, (g1 - g2) / t2, (g1 + g2 + 2 * g3) / t2

    # -- reference maps -------------------------------------------------------

    def _diag(self, entries: Sequence[float]) -> Superoperator:
        return Superoperator(np.diag([*entries, 1.0]).astype(np.complex128), self.spec.basis)

    def reference_propagator(self, t: float) -> Superoperator:
        return self._diag(np.exp(-self.damping(t)))

    def reference_generator_mean(self) -> Superoperator:
        """X = (1/T)∫₀ᵀ L."""
        m = np.diag([*(-self.damping(self.period) / self.period), 0.0])
        return Superoperator(m.astype(np.complex128), self.spec.basis)

    def reference_periodic_part(self, t: float) -> Superoperator:
        th = self.theta(t)
        return self._diag([math.exp(-(th[k] + th[l])) for k, l in _DAMPING_PAIRS])

    def periodic_part_action(self, t: float, x: np.ndarray) -> np.ndarray:
        """P_t(x) written entrywise through ξ and χ."""
        xi1, xi2, chi1, chi2 = self.xi_chi(t)
        return np.array(
            [
                [xi1 * x[0, 0] + xi2 * x[1, 1], chi1 * x[0, 1] - chi2 * x[1, 0]],
                [chi1 * x[1, 0] - chi2 * x[0, 1], xi2 * x[0, 0] + xi1 * x[1, 1]],
            ]
        )

    def generator_mean_action(self, x: np.ndarray) -> np.ndarray:
        b1, b2, b3 = self.beta()
        return np.array(
            [
                [-b1 * (x[0, 0] - x[1, 1]), b2 * x[1, 0] - b3 * x[0, 1]],
                [b2 * x[0, 1] - b3 * x[1, 0], b1 * (x[0, 0] - x[1, 1])],
            ]
        )

    def multipliers(self) -> np.ndarray:
        return np.array([1.0, *np.exp(-self.damping(self.period))])

    def reference_solution(self, rho0: np.ndarray, t: float) -> np.ndarray:
        """ρ_t = ½(I + Σ_j e^{−Γ_kl(t)} tr(σ_j ρ₀) σ_j)."""
        rho0 = np.asarray(rho0, dtype=np.complex128)
        out = 0.5 * np.trace(rho0) * np.eye(2, dtype=np.complex128)
        for sigma, damp in zip(PAULIS, self.damping(t)):
            out += 0.5 * math.exp(-damp) * np.trace(sigma @ rho0) * sigma
        return out

    # -- predicates -----------------------------------------------------------

    def periodic_part_is_cp(self, t: float) -> bool:
        member, _ = region_A_membership(self.theta(t))
        return member

    def divisible_at(self, t: float, tol: float = 0.0) -> bool:
        """Pointwise CP-divisibility condition γ_j(t) ≥ Γ_j(T)/T for all j."""
        mean = self.big_gamma(self.period) / self.period
        return all(g(t) >= m - tol for g, m in zip(self.rates, mean))


def constant_rates(values: Sequence[float], period: float = 2 * math.pi) -> RandomQubitModel:
    return RandomQubitModel(rates=tuple(Constant(v, period) for v in values), period=period)


def raised_cosine_rates(
    offsets: Sequence[float] = (0.0, 0.0, 0.0),
    amplitudes: Sequence[float] = (2.0, 2.0, 2.0),
    phases: Sequence[float] = (0.0, 2 * math.pi / 3, 4 * math.pi / 3),
    period: float = 2 * math.pi,
) -> RandomQubitModel:
    """γ_j(t) = offset_j + amplitude_j(1 + cos(2πt/T + φ_j))/2; defaults give 1 + cos(2πt/T + φ_j)."""
    rates = tuple(
        RaisedCosine(offset=o, amplitude=a, period=period, phase=p)
        for o, a, p in zip(offsets, amplitudes, phases)
    )
    return RandomQubitModel(rates=rates, period=period)


def random_qubit_model(
    rates: Sequence[CoefficientFamily] | None = None, period: float = 2 * math.pi
) -> RandomQubitModel:
    if rates is None:
        return raised_cosine_rates(period=period)
    return RandomQubitModel(rates=tuple(rates), period=period)
