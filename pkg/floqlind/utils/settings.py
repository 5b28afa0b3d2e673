from __future__ import annotations

import math
import os
from pathlib import Path
from typing import Literal

from appdirs import user_data_dir
from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

# Allow tests or callers to specify a custom env file location
ENV_FILE = Path(os.getenv("FLOQLIND_ENV_FILE", str(Path.home() / ".floqlind.env")))


class AppConfig(BaseSettings):
    """
    Application configuration for FloqLind, loaded via Pydantic BaseSettings.
    Persists overrides in ~/.floqlind.env
    """

    output_dir: str = Field(
        str(Path(user_data_dir("floqlind")) / "runs"),
        description="Default directory for scenario results",
    )
    step: float = Field(
        2 * math.pi / 2000,
        gt=0,
        description="Integrator step for the midpoint Magnus scheme (time units)",
    )
    grid: int = Field(
        128, ge=2, description="Certification grid points per period"
    )
    tol_herm: float = Field(
        1e-10, description="Relative Hermiticity tolerance (scaled by the matrix norm)"
    )
    tol_psd: float = Field(
        1e-9, description="Relative PSD tolerance (scaled by the matrix norm)"
    )
    tol_comm: float = Field(
        1e-9,
        description="Relative commutativity tolerance (scaled by max ||L||^2 on the grid)",
    )
    tol_roundtrip: float = Field(
        1e-9, description="Reconstruction tolerance for exp/log and standard form"
    )
    boundary_tol: float = Field(
        1e-8,
        description="Failures with |min eig| below this are reported as marginal.",
    )
    cond_max: float = Field(
        1e8,
        description="Eigenvector condition number above which a matrix counts as defective",
    )
    quad_abs_tol: float = Field(
        1e-12, description="Absolute accuracy target of the adaptive quadrature"
    )
    branch_cut: Literal["principal", "raise"] = Field(
        "principal",
        description=(
            "How the Floquet logarithm treats multipliers on the negative real axis: "
            "'principal' assigns argument +pi, 'raise' aborts with a branch-cut error."
        ),
    )
    workers: int = Field(
        1, ge=1, description="Threads used by divisibility grid scans"
    )
    progress: bool = Field(False, description="Show tqdm progress bars for long scans")
    model_config = SettingsConfigDict(
        env_prefix="FLOQLIND_",
        env_file=str(ENV_FILE),
    )


def load_config() -> AppConfig:
    """Load application configuration from environment and ~/.floqlind.env"""
    return AppConfig()


def save_config(**kwargs) -> None:
    """
    Persist the given settings into ~/.floqlind.env so that Pydantic will load them next time.
    Usage: save_config(step=0.001, grid=256)
    """
    lines: dict[str, str] = {}
    if ENV_FILE.exists():
        for raw in ENV_FILE.read_text().splitlines():
            if raw.strip() and not raw.startswith("#") and "=" in raw:
                k, v = raw.split("=", 1)
                lines[k] = v

    for key, val in kwargs.items():
        env_key = f"FLOQLIND_{key.upper()}"
        lines[env_key] = str(val)

    ENV_FILE.write_text("\n".join(f"{k}={v}" for k, v in lines.items()))
