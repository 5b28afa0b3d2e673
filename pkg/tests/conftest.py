import numpy as np
import pytest

from floqlind.utils import settings as _settings


@pytest.fixture(autouse=True)
def isolated_floqlind_env(tmp_path, monkeypatch):
    """
    Ensure all FloqLind config reads and writes during tests go into a
    temporary file, not ~/.floqlind.env.
    """
    env_file = tmp_path / "floqlind_test.env"
    monkeypatch.setenv("FLOQLIND_ENV_FILE", str(env_file))
    monkeypatch.setattr(_settings, "ENV_FILE", env_file, raising=True)
    monkeypatch.setitem(_settings.AppConfig.model_config, "env_file", str(env_file))
    for var in ("FLOQLIND_STEP", "FLOQLIND_GRID", "FLOQLIND_TOL_PSD"):
        monkeypatch.delenv(var, raising=False)
    monkeypatch.setenv("FLOQLIND_OUTPUT_DIR", str(tmp_path / "runs"))
    return env_file


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def density_matrix(rng):
    """Factory for random full-rank density matrices."""

    def _make(d: int) -> np.ndarray:
        g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        rho = g @ g.conj().T
        return rho / np.trace(rho)

    return _make


@pytest.fixture
def random_qubit():
    from floqlind.models.random_qubit import raised_cosine_rates

    return raised_cosine_rates()


@pytest.fixture
def tls():
    from floqlind.models.driven_tls import driven_tls_model

    return driven_tls_model(gamma_up=0.5, gamma_down=1.0)
