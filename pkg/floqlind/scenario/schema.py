"""
Scenario documents.

A scenario names a model (a builtin or an inline coefficient table), the
numeric options and an ordered list of commands:

    [model]
    name = "driven-tls"
    params = { gamma_up = 0.5, gamma_down = 1.0 }

    [numerics]
    step = 0.003

    [[commands]]
    kind = "certify-divisibility"
    target = "periodic-part"
"""

from __future__ import annotations

import math
from typing import Annotated, Any, Literal, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator

from floqlind.models.families import Constant, Cosine, PiecewiseConstant, RaisedCosine
from floqlind.models.registry import MODELS
from floqlind.utils.options import Tolerances


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


# ---------------------------------------------------------------------------
# Coefficient families
# ---------------------------------------------------------------------------


class ConstantSpec(_Strict):
    family: Literal["constant"]
    value: float

    def build(self, period: float) -> Constant:
        return Constant(self.value, period)


class CosineSpec(_Strict):
    family: Literal["cosine"]
    offset: float = 0.0
    amplitude: float = 1.0
    harmonic: int = Field(1, ge=0)
    phase: float = 0.0

    def build(self, period: float) -> Cosine:
        return Cosine(self.offset, self.amplitude, period, self.harmonic, self.phase)


class RaisedCosineSpec(_Strict):
    family: Literal["raised-cosine"]
    offset: float = 0.0
    amplitude: float = 1.0
    harmonic: int = Field(1, ge=0)
    phase: float = 0.0

    def build(self, period: float) -> RaisedCosine:
        return RaisedCosine(self.offset, self.amplitude, period, self.harmonic, self.phase)


class PiecewiseConstantSpec(_Strict):
    family: Literal["piecewise-constant"]
    edges: list[float] = Field(default_factory=list)
    values: list[float]

    def build(self, period: float) -> PiecewiseConstant:
        return PiecewiseConstant(tuple(self.edges), tuple(self.values), period)


FamilySpec = Annotated[
    Union[ConstantSpec, CosineSpec, RaisedCosineSpec, PiecewiseConstantSpec],
    Field(discriminator="family"),
]


class EntrySpec(_Strict):
    """Matrix entry (row, col), 0-based, with real and imaginary coefficient families."""

    row: int = Field(ge=0)
    col: int = Field(ge=0)
    re: FamilySpec | None = None
    im: FamilySpec | None = None


# ---------------------------------------------------------------------------
# Model
# ---------------------------------------------------------------------------


class ModelSpec(_Strict):
    name: str
    params: dict[str, Any] = Field(default_factory=dict)
    dim: int | None = Field(None, ge=2)
    period: float | None = Field(None, gt=0)
    breakpoints: list[float] = Field(default_factory=list)
    hamiltonian: list[EntrySpec] = Field(default_factory=list)
    kossakowski: list[EntrySpec] = Field(default_factory=list)

    @model_validator(mode="after")
    def _check_model(self) -> ModelSpec:
        if self.name == "inline":
            if self.dim is None or self.period is None:
                raise ValueError("inline model needs 'dim' and 'period'")
            d, n = self.dim, self.dim * self.dim - 1
            for label, entries, size in (("hamiltonian", self.hamiltonian, d), ("kossakowski", self.kossakowski, n)):
                for e in entries:
                    if e.row >= size or e.col >= size:
                        raise ValueError(f"{label} entry ({e.row}, {e.col}) outside {size}x{size}")
            return self
        if self.name not in MODELS:
            raise ValueError(f"unknown model '{self.name}'; available: {', '.join(sorted(MODELS))}")
        if self.hamiltonian or self.kossakowski or self.breakpoints or self.dim is not None:
            raise ValueError("coefficient tables are only allowed for inline models")
        return self


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

MapTarget = Literal["propagator", "periodic-part", "semigroup"]


class _Window(_Strict):
    t_start: float = 0.0
    t_end: float | None = Field(None, description="Defaults to one period.")
    points: int | None = Field(None, ge=2, description="Defaults to the numerics grid.")

    @model_validator(mode="after")
    def _check_window(self):
        if self.t_start < 0:
            raise ValueError("t_start must be non-negative")
        if self.t_end is not None and self.t_end <= self.t_start:
            raise ValueError("t_end must exceed t_start")
        return self


class SimulateCommand(_Window):
    kind: Literal["simulate"]
    method: Literal["auto", "general", "commutative"] = "auto"
    rho0_re: list[list[float]] | None = None
    rho0_im: list[list[float]] | None = None


class FloquetCommand(_Strict):
    kind: Literal["floquet"]
    mode: Literal["auto", "commutative", "general-log"] = "auto"
    semigroup_test: bool = True


class CertifyCPCommand(_Window):
    kind: Literal["certify-cp"]
    target: MapTarget = "propagator"


class CertifyDivisibilityCommand(_Window):
    kind: Literal["certify-divisibility"]
    target: MapTarget = "periodic-part"
    method: Literal["scan", "kossakowski"] = "scan"


class SpectraTrajectoryCommand(_Window):
    kind: Literal["spectra-trajectory"]
    maps: list[MapTarget] = Field(default_factory=lambda: ["propagator", "periodic-part", "semigroup"])


class RegionACommand(_Strict):
    kind: Literal["region-a"]
    x_max: float = Field(3.0, gt=0)
    y_max: float = Field(3.0, gt=0)
    points: int = Field(31, ge=2)


Command = Annotated[
    Union[
        SimulateCommand,
        FloquetCommand,
        CertifyCPCommand,
        CertifyDivisibilityCommand,
        SpectraTrajectoryCommand,
        RegionACommand,
    ],
    Field(discriminator="kind"),
]


# ---------------------------------------------------------------------------
# Scenario
# ---------------------------------------------------------------------------


class NumericsSpec(_Strict):
    step: float | None = Field(None, gt=0)
    grid: int | None = Field(None, ge=2)
    tolerances: dict[str, float] = Field(default_factory=dict)
    branch_cut: Literal["principal", "raise"] | None = None
    workers: int | None = Field(None, ge=1)

    @model_validator(mode="after")
    def _check_tolerances(self) -> NumericsSpec:
        known = set(Tolerances.__dataclass_fields__)
        unknown = set(self.tolerances) - known
        if unknown:
            raise ValueError(f"unknown tolerances {sorted(unknown)}; known: {sorted(known)}")
        bad = [k for k, v in self.tolerances.items() if not (v > 0 and math.isfinite(v))]
        if bad:
            raise ValueError(f"tolerances must be positive and finite: {bad}")
        return self


class OutputSpec(_Strict):
    directory: str | None = None
    plots: bool = False


class Scenario(_Strict):
    model: ModelSpec
    numerics: NumericsSpec = Field(default_factory=NumericsSpec)
    output: OutputSpec = Field(default_factory=OutputSpec)
    commands: list[Command] = Field(min_length=1)
