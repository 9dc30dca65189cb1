# tests/test_dynamics.py

import dataclasses
import math

import numpy as np
import pytest

from mirror_mass.errors import ConvergenceError, NegativeMassError, TrajectoryError
from mirror_mass.physics.dynamics import (
    DynamicsConfig,
    HistoryTrajectory,
    derive_rates,
    evolve,
    initial_state,
)
from mirror_mass.physics.quadrature import QuadratureSpec
from mirror_mass.physics.trajectory import Uniform, VelocityStep, compile_profile


def test_config_validation():
    cfg = DynamicsConfig(a=2.0, initial=Uniform(0.1))
    assert cfg.dtau == pytest.approx(0.05 / 2.0)
    assert cfg.bare_mass == 1.0
    with pytest.raises(ValueError, match="bare_mass"):
        DynamicsConfig(a=1.0, initial=Uniform(0.0), bare_mass=0.0)
    with pytest.raises(ValueError, match="dtau must be > 0"):
        DynamicsConfig(a=1.0, initial=Uniform(0.0), dtau=-0.01)
    with pytest.raises(ValueError, match="0.1/a"):
        DynamicsConfig(a=1.0, initial=Uniform(0.0), dtau=0.2)
    with pytest.raises(ValueError, match="uniform past"):
        DynamicsConfig(a=1.0, initial=compile_profile("eta = 0.1*sin(tau)"))
    with pytest.raises(ValueError, match="a must be > 0"):
        DynamicsConfig(a=0.0, initial=Uniform(0.0))


def test_history_joins_the_prefix():
    prefix = VelocityStep(0.0, 0.4, 1.0)
    h = HistoryTrajectory(prefix, 0.5)
    assert h.uniform_before == -0.5
    assert h.knots[-1] == 0.5
    eta_f = math.atanh(0.4)
    h.append(0.6, eta_f, 0.0)
    h.append(0.7, eta_f, 0.0)
    taus, etas, alphas = h.nodes
    assert taus.tolist() == [0.5, 0.6, 0.7]
    zp0, zm0 = prefix.position(0.5)
    zp, zm = h.position(0.7)
    assert float(zp) == pytest.approx(float(zp0) + 0.2 * math.exp(eta_f), rel=1e-12)
    assert float(zm) == pytest.approx(float(zm0) + 0.2 * math.exp(-eta_f), rel=1e-12)
    assert h.rapidity(0.65, 1)[0] == pytest.approx(eta_f, rel=1e-12)
    assert h.rapidity(0.0, 0)[0] == pytest.approx(float(prefix.rapidity(0.0, 0)[0]))
    assert h.descriptor()["family"] == "history"
    with pytest.raises(TrajectoryError):
        h.append(0.7, eta_f, 0.0)


def test_history_tracks_replaced_nodes():
    h = HistoryTrajectory(Uniform(0.0), 0.0)
    h.append(1.0, 0.0, 0.0)
    before = h.position(1.0)
    h.replace_last(0.2, 0.2)
    after = h.position(1.0)
    assert float(after[0]) > float(before[0])
    assert float(after[1]) < float(before[1])
    assert float(h.rapidity(1.0, 1)[1]) == pytest.approx(0.2)


def test_uniform_mirror_stays_uniform(quick_spec):
    cfg = DynamicsConfig(a=1.0, initial=Uniform(0.3), dtau=0.1, spec=quick_spec)
    series = evolve(cfg, 0.3)
    assert len(series.states) == 4
    assert np.allclose(series.tau, [0.0, 0.1, 0.2, 0.3])
    assert np.all(np.abs(series.column("alpha")) < 1e-9)
    assert np.allclose(series.column("eta"), math.atanh(0.3), atol=1e-9)
    assert np.allclose(series.mu, 0.0, atol=1e-9)
    assert series.converged


def test_initial_state_carries_the_mass_shift(quick_spec):
    cfg = DynamicsConfig(a=1.0, initial=Uniform(0.0), bare_mass=2.0, spec=quick_spec)
    state = initial_state(cfg)
    assert state.m_total == 2.0
    assert state.tau == 0.0 and state.eta == 0.0
    eta_dot, m_dot = derive_rates(state, cfg)
    assert abs(eta_dot) < 1e-9 and abs(m_dot) < 1e-9


def test_derive_rates_needs_history(quick_spec):
    cfg = DynamicsConfig(a=1.0, initial=Uniform(0.0), spec=quick_spec)
    state = initial_state(cfg)
    orphan = dataclasses.replace(state, history=None)
    with pytest.raises(ValueError, match="history"):
        derive_rates(orphan, cfg)


def test_light_mirror_is_rejected(quick_spec):
    # m_total must exceed a/4π
    cfg = DynamicsConfig(a=1.0, initial=Uniform(0.0), bare_mass=0.05, spec=quick_spec)
    with pytest.raises(NegativeMassError) as info:
        initial_state(cfg)
    assert info.value.tau == 0.0
    assert info.value.m_total == pytest.approx(0.05)


def test_evolve_argument_errors(quick_spec):
    cfg = DynamicsConfig(a=1.0, initial=Uniform(0.0), spec=quick_spec)
    with pytest.raises(ValueError, match="tau_end"):
        evolve(cfg, 0.0)


@pytest.mark.slow
def test_kicked_heavy_mirror(quick_spec):
    kick = VelocityStep(0.0, 0.3, 1.0)
    cfg = DynamicsConfig(a=1.0, initial=kick, bare_mass=100.0, tau_start=0.5, spec=quick_spec)
    series = evolve(cfg, 1.5)
    assert len(series.states) == 21
    assert series.converged
    eta = series.column("eta")
    assert np.all(np.isfinite(eta))
    # the radiation reaction barely moves a mirror this heavy
    assert np.max(np.abs(eta - math.atanh(0.3))) < 1e-2
    flux = series.column("flux_plus") + series.column("flux_minus")
    assert np.allclose(series.column("m_dot"), -flux, rtol=1e-12, atol=1e-18)
    residual = series.conservation_residual()
    assert residual.shape == (20,)
    assert np.max(np.abs(residual)) <= 0.1 * np.max(np.abs(flux)) + 1e-12


@pytest.mark.slow
def test_strict_evolution_raises_with_partial_series():
    spec = QuadratureSpec(rel_tol=1e-15, abs_tol=1e-300, max_subdivisions=1)
    cfg = DynamicsConfig(a=1.0, initial=VelocityStep(0.0, 0.5, 0.0), tau_start=0.5, spec=spec)
    with pytest.raises(ConvergenceError) as info:
        evolve(cfg, 0.6, strict=True)
    partial = info.value.result
    assert len(partial.states) >= 2
    assert not partial.states[-1].converged


@pytest.mark.slow
def test_step_halving_converges(quick_spec):
    kick = VelocityStep(0.0, 0.3, 1.0)
    ends = []
    for dtau in (0.05, 0.025):
        cfg = DynamicsConfig(a=1.0, initial=kick, bare_mass=100.0, tau_start=0.5, dtau=dtau, spec=quick_spec)
        ends.append(evolve(cfg, 1.0).states[-1])
    coarse, fine = ends
    assert coarse.tau == pytest.approx(fine.tau)
    assert coarse.eta == pytest.approx(fine.eta, rel=1e-6)
    assert coarse.m_total == pytest.approx(fine.m_total, rel=1e-6)
