from __future__ import annotations

import inspect
import math
from dataclasses import dataclass
from typing import Any, Callable, Sequence

from floqlind.errors import InvalidModelError
from floqlind.models.driven_tls import DrivenTLSModel
from floqlind.models.families import RaisedCosine
from floqlind.models.m3 import M3CounterexampleModel
from floqlind.models.random_qubit import RandomQubitModel, constant_rates, raised_cosine_rates


def _random_qubit(
    period: float = 2 * math.pi,
    constant: Sequence[float] | None = None,
    offsets: Sequence[float] = (0.0, 0.0, 0.0),
    amplitudes: Sequence[float] = (2.0, 2.0, 2.0),
    phases: Sequence[float] = (0.0, 2 * math.pi / 3, 4 * math.pi / 3),
) -> RandomQubitModel:
    if constant is not None:
        return constant_rates(constant, period)
    return raised_cosine_rates(offsets, amplitudes, phases, period)


def _driven_tls(
    period: float = 2 * math.pi,
    gamma_up: float = 0.5,
    gamma_down: float = 1.0,
    omega_offset: float = 0.0,
    omega_amplitude: float = 2.0,
) -> DrivenTLSModel:
    omega = RaisedCosine(offset=omega_offset, amplitude=omega_amplitude, period=period)
    return DrivenTLSModel(omega=omega, gamma_up=gamma_up, gamma_down=gamma_down)


def _m3() -> M3CounterexampleModel:
    return M3CounterexampleModel()


@dataclass(frozen=True)
class ModelEntry:
    factory: Callable[..., Any]
    description: str

    @property
    def defaults(self) -> dict[str, Any]:
        sig = inspect.signature(self.factory)
        return {name: p.default for name, p in sig.parameters.items()}

    def build(self, **params: Any) -> Any:
        unknown = set(params) - set(self.defaults)
        if unknown:
            raise InvalidModelError(f"Unknown model parameters: {', '.join(sorted(unknown))}")
        return self.factory(**params)


MODELS: dict[str, ModelEntry] = {
    "random-qubit": ModelEntry(
        _random_qubit, "Pauli-channel qubit dynamics with periodically modulated rates"
    ),
    "driven-tls": ModelEntry(
        _driven_tls, "Two-level system with modulated splitting, pumping and dumping"
    ),
    "m3-counterexample": ModelEntry(
        _m3, "Non-commuting qutrit dynamics with non-CP Floquet factors"
    ),
}


def build_model(name: str, **params: Any) -> Any:
    try:
        entry = MODELS[name]
    except KeyError:
        raise InvalidModelError(
            f"Unknown model '{name}'; available: {', '.join(sorted(MODELS))}"
        ) from None
    return entry.build(**params)
