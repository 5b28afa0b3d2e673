from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from floqlind.dynamics.lindblad import LindbladSpec
from floqlind.errors import InvalidModelError
from floqlind.linalg.basis import SIGMA_MINUS, SIGMA_PLUS, SIGMA_Z
from floqlind.linalg.superop import Superoperator, vectorize_map
from floqlind.models.families import CoefficientFamily, RaisedCosine


def _default_omega() -> CoefficientFamily:
    # 1 + cos(2πt/T)
    return RaisedCosine(offset=0.0, amplitude=2.0)


@dataclass(frozen=True, eq=False)
class DrivenTLSModel:
    """
    Two-level system with modulated splitting ω(t), pumping γ↑ and dumping γ↓:

        dρ/dt = −(iω(t)/2)[σ₃, ρ] + γ↑ D_{σ+}(ρ) + γ↓ D_{σ−}(ρ).

    Exponents and eigenvectors follow the order 0, −(γ↓+γ↑),
    −(γ↓+γ↑)/2 ± iϖ(T)/T.
    """

    omega: CoefficientFamily = field(default_factory=_default_omega)
    gamma_up: float = 0.5
    gamma_down: float = 1.0

    def __post_init__(self) -> None:
        if not (self.gamma_up > 0 and self.gamma_down > 0):
            raise InvalidModelError(
                f"TLS rates must be positive, got up={self.gamma_up}, down={self.gamma_down}"
            )

    @property
    def period(self) -> float:
        return self.omega.period

    @property
    def total_rate(self) -> float:
        return self.gamma_up + self.gamma_down

    @cached_property
    def kossakowski_matrix(self) -> np.ndarray:
        s, d = self.total_rate, self.gamma_down - self.gamma_up
        return 0.5 * np.array([[s, 1j * d, 0], [-1j * d, s, 0], [0, 0, 0]], dtype=np.complex128)

    @cached_property
    def spec(self) -> LindbladSpec:
        omega, a = self.omega, self.kossakowski_matrix

        def _hamiltonian(t: float) -> np.ndarray:
            return 0.5 * omega(t) * SIGMA_Z

        def _kossakowski(t: float) -> np.ndarray:
            return a

        return LindbladSpec(
            dim=2,
            period=self.period,
            hamiltonian=_hamiltonian,
            kossakowski=_kossakowski,
            breakpoints=self.omega.breakpoints,
            name="driven-tls",
        )

    def varpi(self, t: float) -> float:
        """ϖ(t) = ∫₀ᵗ ω."""
        return self.omega.integral(t)

    @property
    def mean_frequency(self) -> float:
        return self.varpi(self.period) / self.period

    def _phase(self, t: float) -> complex:
        return cmath.exp(-1j * self.varpi(t) + 1j * self.mean_frequency * t)

    # -- reference maps -------------------------------------------------------

    def periodic_part_action(self, t: float, x: np.ndarray) -> np.ndarray:
        ph = self._phase(t)
        return np.array([[x[0, 0], ph * x[0, 1]], [ph.conjugate() * x[1, 0], x[1, 1]]])

    def generator_mean_action(self, x: np.ndarray) -> np.ndarray:
        up, down, w = self.gamma_up, self.gamma_down, self.mean_frequency
        half = 0.5 * self.total_rate
        return np.array(
            [
                [-down * x[0, 0] + up * x[1, 1], (-half - 1j * w) * x[0, 1]],
                [(-half + 1j * w) * x[1, 0], down * x[0, 0] - up * x[1, 1]],
            ]
        )

    def reference_periodic_part(self, t: float) -> Superoperator:
        return vectorize_map(lambda x: self.periodic_part_action(t, x), self.spec.basis)

    def reference_generator_mean(self) -> Superoperator:
        return vectorize_map(self.generator_mean_action, self.spec.basis)

    def reference_propagator(self, t: float) -> Superoperator:
        """Λ_t = P_t e^{tX}."""
        return self.reference_periodic_part(t) @ self.reference_generator_mean().scaled(t).exp()

    def exponents(self) -> np.ndarray:
        s, w = self.total_rate, self.mean_frequency
        return np.array([0.0, -s, -0.5 * s + 1j * w, -0.5 * s - 1j * w])

    def multipliers(self) -> np.ndarray:
        return np.exp(self.exponents() * self.period)

    def eigvecs(self) -> list[np.ndarray]:
        """φ₁ ∝ steady state, φ₂ = σ₃/√2, φ₃ = i√2σ₋, φ₄ = −i√2σ₊."""
        r2 = math.sqrt(2.0)
        phi1 = r2 / self.total_rate * np.diag([self.gamma_up, self.gamma_down]).astype(np.complex128)
        return [phi1, SIGMA_Z / r2, 1j * r2 * SIGMA_MINUS, -1j * r2 * SIGMA_PLUS]

    def coefficients(self, rho0: np.ndarray) -> np.ndarray:
        """c_j with ρ₀ = Σ c_j φ_j for a unit-trace Hermitian ρ₀."""
        rho0 = np.asarray(rho0, dtype=np.complex128)
        r2 = math.sqrt(2.0)
        p_up = self.gamma_up / self.total_rate
        return np.array(
            [
                1 / r2,
                r2 * (rho0[0, 0] - p_up),
                -1j * rho0[1, 0] / r2,
                1j * rho0[0, 1] / r2,
            ]
        )

    def steady_state(self) -> np.ndarray:
        return self.eigvecs()[0] / math.sqrt(2.0)

    def reference_solution(self, rho0: np.ndarray, t: float) -> np.ndarray:
        rho0 = np.asarray(rho0, dtype=np.complex128)
        s = self.total_rate
        p_up = self.gamma_up / s
        excited = p_up + (rho0[0, 0].real - p_up) * math.exp(-s * t)
        coherence = rho0[0, 1] * math.exp(-0.5 * s * t) * cmath.exp(-1j * self.varpi(t))
        return np.array([[excited, coherence], [coherence.conjugate(), 1 - excited]])


def driven_tls_model(
    omega: CoefficientFamily | None = None, gamma_up: float = 0.5, gamma_down: float = 1.0
) -> DrivenTLSModel:
    return DrivenTLSModel(
        omega=omega if omega is not None else _default_omega(),
        gamma_up=gamma_up,
        gamma_down=gamma_down,
    )
