# tests/test_run_state.py

import pytest

from interface.run_state import DEFAULTS, RunConfig, load_run_params, read_config_file, safe_cast
from mirror_mass.utils.config_codec import decode_config


def _config(command="mu", **overrides):
    return RunConfig.from_params(command, load_run_params(overrides=overrides))


def test_safe_cast():
    assert safe_cast("3", int, 0) == 3
    assert safe_cast(None, float, 1.5) == 1.5
    assert safe_cast("x", float, None) is None


def test_defaults_build_a_valid_config():
    cfg = _config()
    assert cfg.a == 1.0 and cfg.family == "uniform"
    assert cfg.tau_end == 10.0 and cfg.method == "accumulate"
    assert cfg.rel_tol is None and cfg.quick is False


def test_proper_times_in_units_of_a():
    cfg = _config(a=2.0, tau_end="20/a", dtau="0.5/a", tau_start="-1/a")
    assert cfg.tau_end == 10.0
    assert cfg.dtau == 0.25
    assert cfg.tau_start == -0.5


def test_invalid_values():
    with pytest.raises(ValueError, match="a must be > 0"):
        _config(a=-1.0)
    with pytest.raises(ValueError, match="tau_start must be < tau_end"):
        _config(tau_start=5.0, tau_end=5.0)
    with pytest.raises(ValueError, match="format"):
        _config(format="xml")
    with pytest.raises(ValueError, match="threads"):
        _config(threads=-2)
    with pytest.raises(ValueError):
        _config(tau_end="ten")


def test_layers_apply_in_order(tmp_path):
    path = tmp_path / "run.conf"
    path.write_text(
        "# comment line\n"
        "a = 2.0\n"
        "tau-end = 20/a   # proper time\n"
        "method = direct\n"
        "quick = true\n"
        "traj = 'eta = 0.1*tau'\n"
        "rel_tol =\n",
        encoding="utf-8",
    )
    code = _config(a=3.0, beta=0.4, samples=7).run_code()
    params = load_run_params(code=code, config_path=str(path), overrides={"samples": 9, "beta": None})
    assert params["a"] == 2.0
    assert params["beta"] == 0.4
    assert params["samples"] == 9
    assert params["method"] == "direct"
    assert params["quick"] is True
    assert params["traj"] == "eta = 0.1*tau"
    assert params["rel_tol"] is None
    assert RunConfig.from_params("mu", params).tau_end == 10.0


def test_config_file_errors(tmp_path):
    bad = tmp_path / "bad.conf"
    bad.write_text("a 2\n", encoding="utf-8")
    with pytest.raises(ValueError, match="bad.conf:1"):
        read_config_file(str(bad))
    unknown = tmp_path / "unknown.conf"
    unknown.write_text("\ncolour = red\n", encoding="utf-8")
    with pytest.raises(ValueError, match="unknown setting 'colour'"):
        read_config_file(str(unknown))


def test_run_code_reproduces_the_run():
    cfg = _config(family="step", beta_f=0.7, width=0.5, out="result.csv")
    decoded = decode_config(cfg.run_code())
    assert "out" not in decoded and "command" not in decoded
    assert set(decoded) == set(DEFAULTS) - {"out"}
    again = RunConfig.from_params("mu", load_run_params(code=cfg.run_code()))
    assert again == RunConfig.from_params("mu", {**load_run_params(), **decoded})
    assert again.beta_f == 0.7 and again.out is None


def test_corrupted_run_code():
    with pytest.raises(ValueError):
        load_run_params(code="mm2.00000000.bm90LWEtY29kZQ")
