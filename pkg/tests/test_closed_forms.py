# tests/test_closed_forms.py

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mirror_mass.oracles.registry import load_record
from mirror_mass.physics.closed_forms import (
    EULER_GAMMA,
    mu0_closed_form,
    mu_asymptotic,
    mu_dot_asymptotic,
    slow_motion_mu,
    slow_motion_mu_dot,
    step_coefficient,
)

small = st.floats(min_value=-1.0, max_value=1.0, allow_nan=False)
couplings = st.floats(min_value=0.01, max_value=100.0)
betas = st.floats(min_value=-0.99, max_value=0.99)


def test_mu0_examples():
    assert mu0_closed_form(2.0) == pytest.approx(-EULER_GAMMA / (2.0 * math.pi), rel=1e-14)
    assert mu0_closed_form(2.0) == pytest.approx(-0.0918667263, rel=1e-9)
    assert mu0_closed_form(0.5) == pytest.approx(0.03219221851, rel=1e-9)
    assert mu0_closed_form(2.0 * math.exp(-EULER_GAMMA)) == pytest.approx(0.0, abs=1e-15)


def test_mu0_matches_dense_quadrature_record():
    record = load_record("mu0_uniform")
    assert mu0_closed_form(record.inputs["a"]) == pytest.approx(record.value, rel=1e-10)


def test_mu_dot_asymptotic_examples():
    assert mu_dot_asymptotic(0.01, 0.001, 0.0, 1.0) == pytest.approx(1.1937e-7, rel=1e-4)
    assert mu_dot_asymptotic(0.3, 0.0, 0.0, 2.0) == 0.0


def test_mu_asymptotic_examples():
    assert mu_asymptotic(0.01, 1.0) == pytest.approx(6.6315e-7, rel=1e-4)
    assert mu_asymptotic(0.0, 3.0) == 0.0
    assert slow_motion_mu(0.01, 1.0) == pytest.approx(4.0 * 6.6315e-7, rel=1e-4)


@settings(max_examples=100, deadline=None)
@given(small, small, small, couplings)
def test_rate_is_even_under_reflection(alpha, alpha_dot, alpha_ddot, a):
    assert mu_dot_asymptotic(-alpha, -alpha_dot, -alpha_ddot, a) == pytest.approx(
        mu_dot_asymptotic(alpha, alpha_dot, alpha_ddot, a), rel=1e-14, abs=1e-300
    )
    assert mu_asymptotic(-alpha, a) == mu_asymptotic(alpha, a) >= 0.0


@settings(max_examples=100, deadline=None)
@given(small, small, small, couplings)
def test_kernel_normalization_is_twice_printed_at_half_coupling(alpha, alpha_dot, alpha_ddot, a):
    printed = mu_dot_asymptotic(alpha, alpha_dot, alpha_ddot, 0.5 * a)
    scale = (abs(alpha * alpha_dot) / a + abs(alpha * alpha_ddot) / a**2 + alpha_dot**2 / a**2) / math.pi
    assert slow_motion_mu_dot(alpha, alpha_dot, alpha_ddot, a) == pytest.approx(2.0 * printed, rel=1e-12, abs=1e-14 * scale)
    assert slow_motion_mu(alpha, a) == pytest.approx(2.0 * mu_asymptotic(alpha, 0.5 * a), rel=1e-14, abs=1e-300)


def test_step_coefficient_examples():
    assert step_coefficient(0.3, 0.3, 1.0) == 0.0
    assert step_coefficient(0.0, 0.5, 1.0) == pytest.approx(load_record("step_coefficient").value, rel=1e-10)
    assert step_coefficient(0.0, 0.5, 1.0) == pytest.approx(
        (1.0 / math.sqrt(0.75) - 1.0) / (4.0 * math.pi), rel=1e-12
    )


@settings(max_examples=200, deadline=None)
@given(betas, betas, couplings)
def test_step_coefficient_properties(bi, bf, a):
    c = step_coefficient(bi, bf, a)
    assert c >= 0.0
    assert c == pytest.approx(step_coefficient(bf, bi, a), rel=1e-12, abs=1e-300)
    gi, gf = 1.0 / math.sqrt(1 - bi * bi), 1.0 / math.sqrt(1 - bf * bf)
    assert c == pytest.approx(a / (4 * math.pi) * (gi * gf * (1 - bi * bf) - 1), rel=1e-6, abs=1e-12 * a)


@pytest.mark.parametrize(
    "call",
    [
        lambda: mu0_closed_form(0.0),
        lambda: mu_asymptotic(0.1, -1.0),
        lambda: mu_dot_asymptotic(0.1, 0.0, 0.0, 1.0, convention="other"),
        lambda: step_coefficient(1.0, 0.0, 1.0),
    ],
)
def test_invalid_arguments(call):
    with pytest.raises(ValueError):
        call()
