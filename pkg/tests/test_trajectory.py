# tests/test_trajectory.py

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mirror_mass.errors import TrajectoryError
from mirror_mass.physics.trajectory import (
    AlphaProfile,
    Hyperbolic,
    RescaledTrajectory,
    Uniform,
    VelocityStep,
    compile_profile,
    from_descriptor,
    null_separation,
    rescale,
    smoothstep,
    state,
)


def _families():
    return {
        "uniform": Uniform(0.5),
        "hyperbolic": Hyperbolic(0.3),
        "hyperbolic_from": Hyperbolic(0.3, tau0=-1.0),
        "hyperbolic_smooth": Hyperbolic.smooth(0.3, -1.0, 2.0),
        "step": VelocityStep(-0.2, 0.6, 1.5),
        "sharp_step": VelocityStep(0.0, 0.5, 0.0),
        "eta_profile": compile_profile("eta = 0.2*tanh(tau/5)"),
        "alpha_profile": compile_profile("alpha = 0.05*exp(-(tau/2)^2)", uniform_before=-10.0),
    }


FAMILIES = _families()


def _check_state_invariants(s):
    assert s.d1plus > 0 and s.d1minus > 0
    assert s.d1plus * s.d1minus == pytest.approx(1.0, rel=1e-12)
    assert s.d2plus / s.d1plus == pytest.approx(s.alpha, rel=1e-10, abs=1e-15)
    assert -s.d2minus / s.d1minus == pytest.approx(s.alpha, rel=1e-10, abs=1e-15)
    assert math.log(s.d1plus) == pytest.approx(s.eta, rel=1e-12, abs=1e-15)


def test_rest_frame():
    s = state(Uniform(0.0), 1.0)
    assert (s.d1plus, s.d1minus, s.alpha) == (1.0, 1.0, 0.0)
    assert (s.z.zplus, s.z.zminus) == (1.0, 1.0)


def test_uniform_normalization():
    s = state(Uniform(0.5), 7.3)
    assert s.d1plus == pytest.approx(math.sqrt(3.0), rel=1e-14)
    assert s.d1minus == pytest.approx(1.0 / math.sqrt(3.0), rel=1e-14)


def test_hyperbolic_defining_property():
    s = state(Hyperbolic(0.3), 2.0)
    assert s.alpha == pytest.approx(0.3)
    assert s.eta == pytest.approx(0.6)


@pytest.mark.parametrize("name", sorted(FAMILIES))
def test_state_invariants_for_every_family(name, rng):
    traj = FAMILIES[name]
    for tau in rng.uniform(-20.0, 20.0, 40):
        _check_state_invariants(traj.state(float(tau)))


@pytest.mark.parametrize("name", sorted(FAMILIES))
def test_normalization_vectorized(name, rng):
    eta = FAMILIES[name].rapidity(rng.uniform(-50.0, 50.0, 1000), 0)[0]
    assert np.allclose(np.exp(eta) * np.exp(-eta), 1.0, rtol=1e-12)


@pytest.mark.parametrize("name", ["hyperbolic", "hyperbolic_smooth", "step", "eta_profile", "alpha_profile"])
def test_derivatives_match_positions(name):
    traj = FAMILIES[name]
    h = 1e-3
    for tau in (-3.3, -0.4, 0.7, 2.9):
        zp, zm = traj.position(tau + h * np.arange(-2, 3))
        s = traj.state(tau)
        # five-point stencils
        d1p = (zp[0] - 8 * zp[1] + 8 * zp[3] - zp[4]) / (12 * h)
        d2p = (-zp[0] + 16 * zp[1] - 30 * zp[2] + 16 * zp[3] - zp[4]) / (12 * h * h)
        d1m = (zm[0] - 8 * zm[1] + 8 * zm[3] - zm[4]) / (12 * h)
        assert d1p == pytest.approx(s.d1plus, rel=1e-6)
        assert d1m == pytest.approx(s.d1minus, rel=1e-6)
        assert d2p == pytest.approx(s.d2plus, rel=1e-5, abs=1e-6)
        assert s.d2plus / s.d1plus + s.d2minus / s.d1minus == pytest.approx(0.0, abs=1e-10)


def test_third_and_fourth_derivatives_from_rapidity():
    traj = Hyperbolic(0.5)
    s = traj.state(1.0)
    assert s.d3plus == pytest.approx(0.25 * s.d1plus)
    assert s.d4plus == pytest.approx(0.125 * s.d1plus)
    assert s.d4minus == pytest.approx(-0.125 * s.d1minus)


def test_null_separation_examples():
    assert null_separation(Uniform(0.0), 3.0, 1.0) == pytest.approx((2.0, 2.0))
    for traj in FAMILIES.values():
        assert null_separation(traj, 1.7, 1.7) == (0.0, 0.0)
    dzp, _ = null_separation(Hyperbolic(0.5), 1.0, 0.0)
    assert dzp == pytest.approx(2.0 * (math.exp(0.5) - 1.0), rel=1e-14)


@settings(max_examples=100, deadline=None)
@given(
    st.floats(min_value=-10.0, max_value=10.0),
    st.floats(min_value=0.01, max_value=10.0),
)
def test_separation_is_timelike(tau2, gap):
    traj = FAMILIES["eta_profile"]
    dzp, dzm = null_separation(traj, tau2 + gap, tau2)
    assert dzp * dzm >= gap * gap * (1.0 - 1e-12)


@settings(max_examples=100, deadline=None)
@given(
    st.floats(min_value=-5.0, max_value=5.0),
    st.floats(min_value=0.05, max_value=5.0),
    st.floats(min_value=0.05, max_value=1.0),
)
def test_hyperbolic_velocity_ratio(tau2, gap, alpha0):
    traj = Hyperbolic(alpha0)
    tau1 = tau2 + gap
    (zp1, _), (zp2, _) = traj.position(tau1), traj.position(tau2)
    dp1, dp2 = traj.state(tau1).d1plus, traj.state(tau2).d1plus
    assert (dp1 - dp2) / (zp1 - zp2) == pytest.approx(alpha0, rel=1e-12)


def test_uniform_past_has_zero_acceleration():
    for name in ("hyperbolic_from", "hyperbolic_smooth", "step", "alpha_profile"):
        traj = FAMILIES[name]
        tau = np.linspace(traj.uniform_before - 30.0, traj.uniform_before - 1e-9, 50)
        assert np.all(traj.rapidity(tau, 3)[1:] == 0.0)


def test_sharp_step_is_right_continuous():
    traj = FAMILIES["sharp_step"]
    assert traj.breakpoints == (0.0,) and traj.is_sharp
    assert traj.state(0.0).eta == pytest.approx(math.atanh(0.5))
    assert traj.state(-1e-12).eta == 0.0
    zp, zm = traj.position(np.array([-1.0, 2.0]))
    assert np.allclose(zp, [-1.0, 2.0 * math.sqrt(3.0)])


def test_smoothstep_limits_and_symmetry():
    x = np.linspace(-0.49, 0.49, 41)
    s = smoothstep(x, 1)
    assert np.allclose(s[0] + s[0][::-1], 1.0)
    assert np.all(s[1] >= 0.0)
    assert smoothstep(-0.6)[0] == 0.0 and smoothstep(0.6)[0] == 1.0


def test_rescale_families():
    assert rescale(Uniform(0.3), 5.0).beta == 0.3
    assert rescale(Hyperbolic(0.6), 2.0).alpha0 == pytest.approx(0.3)
    assert rescale(VelocityStep(0.1, 0.4, 1.0), 3.0).width == pytest.approx(3.0)
    with pytest.raises(ValueError):
        rescale(Uniform(0.3), 0.0)


@pytest.mark.parametrize("name", ["hyperbolic_smooth", "eta_profile", "alpha_profile"])
def test_rescale_relation(name):
    traj = FAMILIES[name]
    lam = 2.5
    scaled = traj.rescale(lam)
    tau = np.array([-4.0, 0.3, 6.0])
    zp, zm = scaled.position(lam * tau)
    base_p, base_m = traj.position(tau)
    # positions are defined up to a constant; compare differences
    assert np.allclose(np.diff(zp), lam * np.diff(base_p), rtol=1e-10)
    assert np.allclose(np.diff(zm), lam * np.diff(base_m), rtol=1e-10)
    assert scaled.state(lam * 0.3).alpha == pytest.approx(traj.state(0.3).alpha / lam, rel=1e-12, abs=1e-16)


def test_generic_rescale_wrapper():
    traj = compile_profile("eta = 0.2*tanh(tau/5)")
    wrapped = RescaledTrajectory(traj, 2.0)
    assert wrapped.rescale(0.5).state(1.0).eta == pytest.approx(traj.state(1.0).eta)
    assert from_descriptor(wrapped.descriptor()).state(3.0).eta == pytest.approx(wrapped.state(3.0).eta)


@pytest.mark.parametrize("name", sorted(FAMILIES))
def test_descriptor_round_trip(name):
    traj = FAMILIES[name]
    rebuilt = from_descriptor(traj.descriptor())
    assert rebuilt.state(1.3).eta == pytest.approx(traj.state(1.3).eta, rel=1e-13, abs=1e-15)
    assert rebuilt.breakpoints == traj.breakpoints


def test_alpha_profile_integrates_to_rapidity():
    traj = compile_profile("alpha = 0.1", uniform_before=0.0)
    assert isinstance(traj, AlphaProfile)
    assert traj.state(3.0).eta == pytest.approx(0.3, rel=1e-12)
    assert traj.state(-1.0).eta == 0.0


def test_invalid_parameters():
    with pytest.raises(TrajectoryError):
        Uniform(1.0)
    with pytest.raises(TrajectoryError):
        VelocityStep(0.0, 0.5, -1.0)
    with pytest.raises(TrajectoryError):
        Hyperbolic(math.nan)
    with pytest.raises(TrajectoryError):
        Hyperbolic.smooth(0.3, 0.0, 0.0)
    with pytest.raises(TrajectoryError):
        Uniform(0.0).state(math.inf)
    with pytest.raises(TrajectoryError):
        from_descriptor({"family": "spiral"})


def test_concurrent_position_tables():
    from concurrent.futures import ThreadPoolExecutor

    traj = compile_profile("eta = 0.3*sin(0.2*tau)")
    taus = np.linspace(-40.0, 40.0, 64)
    with ThreadPoolExecutor(max_workers=8) as pool:
        parallel = list(pool.map(lambda t: traj.position(t)[0], taus))
    fresh = compile_profile("eta = 0.3*sin(0.2*tau)")
    assert np.allclose(parallel, fresh.position(taus)[0], rtol=1e-12, atol=1e-12)
