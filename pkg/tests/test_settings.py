import pytest

from src.quantum_hj.utils.settings import Config, config


def test_config_is_a_singleton():
    assert Config() is config
    assert config.get("log_level") == "INFO"
    assert config.get("missing", 42) == 42


def test_load_file_overrides_selected_fields(tmp_path):
    path = tmp_path / "run.env"
    path.write_text("# overrides\nLOG_LEVEL=debug\nQUAD_ORDER=16\nsweep_window=1e-5\nHBAR=0.1\nE=2\n")
    raw = config.load_file(path)
    assert raw["quad_order"] == "16"
    assert config.log_level == "DEBUG"
    assert config.quadrature.order == 16
    assert isinstance(config.quadrature.order, int)
    assert config.quadrature.abs_tol == 1e-10
    assert config.sweep.window == 1e-5
    assert (config.physics.hbar, config.physics.E, config.physics.m) == (0.1, 2.0, 1.0)


def test_load_defaults_resets_overrides(tmp_path):
    path = tmp_path / "run.env"
    path.write_text("ORACLE_STEP_FRACTION=0.01\n")
    config.load_file(path)
    assert config.oracle.step_fraction == 0.01
    config.load_defaults()
    assert config.oracle.step_fraction == 1e-3


def test_load_file_errors(tmp_path):
    with pytest.raises(FileNotFoundError):
        config.load_file(tmp_path / "absent.env")
    bad = tmp_path / "bad.env"
    bad.write_text("QUAD_MAX_DEPTH=deep\n")
    with pytest.raises(ValueError):
        config.load_file(bad)


def test_load_file_covers_specfun_and_oracle_limits(tmp_path):
    path = tmp_path / "run.env"
    path.write_text("SPECFUN_TAYLOR_STEP=0.125\nSPECFUN_ASYMPTOTIC_POS=9\nORACLE_QUAD_LIMIT=400\nORACLE_QUAD_ABS_TOL=1e-12\n")
    config.load_file(path)
    assert config.specfun.taylor_step == 0.125
    assert config.specfun.asymptotic_pos == 9.0
    assert config.oracle.quad_limit == 400
    assert isinstance(config.oracle.quad_limit, int)
    assert config.oracle.quad_abs_tol == 1e-12


def test_load_file_keeps_run_keys_as_text(tmp_path):
    path = tmp_path / "run.env"
    path.write_text("POTENTIAL=linear\nABC= 2,1,0.5 \nHBAR_GRID=1e-1:1e-3\n")
    config.load_file(path)
    assert config.run == {"potential": "linear", "abc": "2,1,0.5", "hbar_grid": "1e-1:1e-3"}
    config.load_defaults()
    assert config.run == {}


def test_load_file_rejects_unknown_keys(tmp_path):
    path = tmp_path / "run.env"
    path.write_text("QUAD_ORDER=16\nPOTENTIAL_KIND=step\n")
    with pytest.raises(ValueError, match="potential_kind"):
        config.load_file(path)
    assert config.quadrature.order == 24
