import importlib


def test_floqlind_env_is_isolated(tmp_path, monkeypatch):
    monkeypatch.setenv("FLOQLIND_ENV_FILE", str(tmp_path / "floqlind_test.env"))
    # Reload settings to pick up the env var
    from floqlind.utils import settings

    importlib.reload(settings)
    assert str(tmp_path) in str(settings.ENV_FILE)


def test_save_config_round_trip(isolated_floqlind_env):
    from floqlind.utils.settings import load_config, save_config

    save_config(step=0.005, grid=64)
    save_config(tol_psd=1e-8)
    text = isolated_floqlind_env.read_text()
    assert "FLOQLIND_STEP=0.005" in text
    assert "FLOQLIND_TOL_PSD=1e-08" in text

    cfg = load_config()
    assert cfg.step == 0.005
    assert cfg.grid == 64
    assert cfg.tol_psd == 1e-8


def test_environment_overrides_defaults(monkeypatch):
    from floqlind.utils.settings import load_config

    monkeypatch.setenv("FLOQLIND_BRANCH_CUT", "raise")
    monkeypatch.setenv("FLOQLIND_WORKERS", "4")
    cfg = load_config()
    assert cfg.branch_cut == "raise"
    assert cfg.workers == 4


def test_tolerances_from_config(monkeypatch):
    from floqlind.utils.options import FloquetOptions, Tolerances
    from floqlind.utils.settings import load_config

    monkeypatch.setenv("FLOQLIND_BOUNDARY_TOL", "1e-6")
    cfg = load_config()
    tol = Tolerances.from_config(cfg)
    assert tol.boundary == 1e-6
    assert tol.with_overrides(psd=1e-7, herm=None).psd == 1e-7
    assert tol.with_overrides(herm=None).herm == tol.herm

    options = FloquetOptions.from_config(cfg, mode="general-log")
    assert options.mode == "general-log"
    assert options.integrator.step == cfg.step


def test_integrator_default_step_matches_config():
    import math

    from floqlind.utils.options import FloquetOptions, IntegratorOptions
    from floqlind.utils.settings import load_config

    assert IntegratorOptions().step == load_config().step == 2 * math.pi / 2000
    assert FloquetOptions().integrator.step == IntegratorOptions().step
