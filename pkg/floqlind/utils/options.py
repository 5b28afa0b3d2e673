from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Literal

from floqlind.utils.settings import AppConfig


@dataclass(frozen=True)
class Tolerances:
    """Numerical tolerances shared by the linear-algebra and certification layers.

    Hermiticity, PSD and commutativity tolerances are relative: they are
    multiplied by the norm of the matrix under test.
    """

    herm: float = 1e-10
    psd: float = 1e-9
    comm: float = 1e-9
    roundtrip: float = 1e-9
    boundary: float = 1e-8
    cond_max: float = 1e8
    quad_abs: float = 1e-12

    @classmethod
    def from_config(cls, cfg: AppConfig) -> Tolerances:
        return cls(
            herm=cfg.tol_herm,
            psd=cfg.tol_psd,
            comm=cfg.tol_comm,
            roundtrip=cfg.tol_roundtrip,
            boundary=cfg.boundary_tol,
            cond_max=cfg.cond_max,
            quad_abs=cfg.quad_abs_tol,
        )

    def with_overrides(self, **kwargs) -> Tolerances:
        return replace(self, **{k: v for k, v in kwargs.items() if v is not None})


DEFAULT_STEP: float = AppConfig.model_fields["step"].default


@dataclass(frozen=True)
class IntegratorOptions:
    step: float = DEFAULT_STEP
    validate: bool = True
    verify_nodes: bool = False
    progress: bool = False


@dataclass(frozen=True)
class FloquetOptions:
    """How `floquet_split` builds X and P_t."""

    mode: Literal["auto", "commutative", "general-log"] = "auto"
    integrator: IntegratorOptions = IntegratorOptions()
    comm_grid: int = 20
    branch_cut: Literal["principal", "raise"] = "principal"
    tolerances: Tolerances = Tolerances()

    @classmethod
    def from_config(cls, cfg: AppConfig, **kwargs) -> FloquetOptions:
        base = cls(
            integrator=IntegratorOptions(step=cfg.step, progress=cfg.progress),
            branch_cut=cfg.branch_cut,
            tolerances=Tolerances.from_config(cfg),
        )
        return replace(base, **kwargs)
