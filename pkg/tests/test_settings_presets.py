# tests/test_settings_presets.py

import math

import pytest

from mirror_mass.config.presets import TRAJECTORY_PRESETS, TrajectoryPreset
from mirror_mass.config.settings import SETTINGS, load_settings
from mirror_mass.physics.trajectory import Hyperbolic, Uniform, VelocityStep


def test_packaged_defaults():
    q = SETTINGS.quadrature
    assert (q.rel_tol, q.abs_tol, q.window_lambda) == (1e-8, 1e-12, 40.0)
    assert q.max_subdivisions == 2000
    assert SETTINGS.series.accumulation_tol == 1e-9
    assert SETTINGS.dynamics.step_fraction == 0.05
    assert SETTINGS.run.threads == 0
    assert SETTINGS.run.format == "csv"


def test_load_settings_from_other_file(tmp_path):
    path = tmp_path / "alt.yaml"
    path.write_text(
        "quadrature: {rel_tol: 1.0e-6, abs_tol: 1.0e-10, window_lambda: 20,"
        " max_subdivisions: 10, segment_panels: 2, segment_nodes: 8}\n"
        "series: {accumulation_tol: 1.0e-7, max_depth: 4}\n"
        "dynamics: {bare_mass: 2.0, step_fraction: 0.1}\n"
        "run: {version: '9.9'}\n",
        encoding="utf-8",
    )
    s = load_settings(str(path))
    assert s.quadrature.window_lambda == 20.0
    assert s.dynamics.bare_mass == 2.0
    assert s.run.threads == 0 and s.run.format == "csv"


def test_every_preset_builds():
    assert {"rest", "sharp_step", "slow_sine", "gaussian_kick"} <= set(TRAJECTORY_PRESETS)
    for preset in TRAJECTORY_PRESETS.values():
        traj = preset.build(2.0)
        assert math.isfinite(traj.state(1.0).eta)


def test_preset_times_scale_with_coupling():
    step = TRAJECTORY_PRESETS["smooth_step"]
    assert step.resolved_params(2.0)["width"] == pytest.approx(1.0)
    assert step.resolved_params(0.5)["width"] == pytest.approx(4.0)
    assert isinstance(step.build(1.0), VelocityStep)
    assert TRAJECTORY_PRESETS["gaussian_kick"].build(2.0).uniform_before == pytest.approx(-5.0)
    assert TRAJECTORY_PRESETS["slow_sine"].build(2.0).uniform_before == pytest.approx(-150.0 * math.pi)


def test_preset_families():
    assert isinstance(TRAJECTORY_PRESETS["cruise"].build(1.0), Uniform)
    hyper = TRAJECTORY_PRESETS["constant_acceleration"].build(1.0)
    assert isinstance(hyper, Hyperbolic) and hyper.tau0 == 0.0
    assert TRAJECTORY_PRESETS["sharp_step"].build(1.0).is_sharp


def test_preset_is_frozen():
    preset = TrajectoryPreset("x", "x", "uniform", {"beta": 0.1})
    with pytest.raises(Exception):
        preset.family = "step"
