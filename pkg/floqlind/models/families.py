"""
Periodic scalar coefficient families with closed-form antiderivatives.

Every family is evaluated at t mod T, so negative times are valid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Protocol, Sequence


class CoefficientFamily(Protocol):
    period: float

    def __call__(self, t: float) -> float: ...

    def integral(self, t: float) -> float: ...

    @property
    def minimum(self) -> float: ...

    @property
    def breakpoints(self) -> tuple[float, ...]: ...


@dataclass(frozen=True)
class Constant:
    value: float
    period: float = 2 * math.pi

    def __call__(self, t: float) -> float:
        return self.value

    def integral(self, t: float) -> float:
        """∫₀ᵗ."""
        return self.value * t

    @property
    def minimum(self) -> float:
        return self.value

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return ()


@dataclass(frozen=True)
class Cosine:
    """offset + amplitude·cos(2πkt/T + phase)."""

    offset: float
    amplitude: float
    period: float = 2 * math.pi
    harmonic: int = 1
    phase: float = 0.0

    @property
    def _omega(self) -> float:
        return 2 * math.pi * self.harmonic / self.period

    def __call__(self, t: float) -> float:
        return self.offset + self.amplitude * math.cos(self._omega * t + self.phase)

    def integral(self, t: float) -> float:
        if self.harmonic == 0:
            return (self.offset + self.amplitude * math.cos(self.phase)) * t
        w = self._omega
        return self.offset * t + self.amplitude / w * (math.sin(w * t + self.phase) - math.sin(self.phase))

    @property
    def minimum(self) -> float:
        if self.harmonic == 0:
            return self(0.0)
        return self.offset - abs(self.amplitude)

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return ()


@dataclass(frozen=True)
class RaisedCosine:
    """offset + amplitude·(1 + cos(2πkt/T + phase))/2; non-negative for offset, amplitude ≥ 0."""

    offset: float
    amplitude: float
    period: float = 2 * math.pi
    harmonic: int = 1
    phase: float = 0.0

    def _as_cosine(self) -> Cosine:
        return Cosine(
            offset=self.offset + 0.5 * self.amplitude,
            amplitude=0.5 * self.amplitude,
            period=self.period,
            harmonic=self.harmonic,
            phase=self.phase,
        )

    def __call__(self, t: float) -> float:
        return self._as_cosine()(t)

    def integral(self, t: float) -> float:
        return self._as_cosine().integral(t)

    @property
    def minimum(self) -> float:
        return self._as_cosine().minimum

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return ()


@dataclass(frozen=True)
class PiecewiseConstant:
    """
    ``values[i]`` on [edges[i], edges[i+1]) within one period, with
    edges[0] = 0 implied and the last piece running up to T.
    """

    edges: tuple[float, ...]
    values: tuple[float, ...]
    period: float = 2 * math.pi

    def __post_init__(self) -> None:
        edges = tuple(float(e) for e in self.edges)
        if not edges or edges[0] != 0.0:
            edges = (0.0, *edges)
        if len(edges) != len(self.values):
            raise ValueError(
                f"piecewise-constant needs one value per piece ({len(edges)} pieces, "
                f"{len(self.values)} values)"
            )
        if list(edges) != sorted(set(edges)) or edges[-1] >= self.period:
            raise ValueError(f"edges must be strictly increasing within [0, T), got {edges}")
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))

    def _piece(self, tau: float) -> int:
        idx = 0
        for i, e in enumerate(self.edges):
            if tau >= e:
                idx = i
        return idx

    def __call__(self, t: float) -> float:
        tau = t - math.floor(t / self.period) * self.period
        return self.values[self._piece(tau)]

    def _partial(self, tau: float) -> float:
        total = 0.0
        bounds = (*self.edges, self.period)
        for i, v in enumerate(self.values):
            lo, hi = bounds[i], bounds[i + 1]
            if tau <= lo:
                break
            total += v * (min(tau, hi) - lo)
        return total

    def integral(self, t: float) -> float:
        n = math.floor(t / self.period)
        tau = t - n * self.period
        return n * self._partial(self.period) + self._partial(tau)

    @property
    def minimum(self) -> float:
        return min(self.values)

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return tuple(e for e in self.edges if e > 0.0)


def merged_breakpoints(families: Sequence[CoefficientFamily]) -> tuple[float, ...]:
    return tuple(sorted({b for f in families for b in f.breakpoints}))
