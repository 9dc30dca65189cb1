# tests/test_taylor.py

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mirror_mass.utils import taylor
from mirror_mass.utils.taylor import Jet, JetDomainError

points = st.floats(min_value=-2.0, max_value=2.0, allow_nan=False, allow_infinity=False)


def test_polynomial_is_exact():
    t = Jet.variable(np.array([3.0]), 3)
    d = (t * t * t - 2.0 * t).derivatives()[:, 0]
    assert list(d) == [21.0, 25.0, 18.0, 6.0]


def test_exp_derivatives():
    d = taylor.exp(Jet.variable(np.array(0.0), 3)).derivatives()
    assert np.allclose(d, [1.0, 1.0, 1.0, 1.0])


@settings(max_examples=50, deadline=None)
@given(points)
def test_sin_cos_derivatives(x):
    s = taylor.sin(Jet.variable(np.array(x), 4)).derivatives()
    expected = [math.sin(x), math.cos(x), -math.sin(x), -math.cos(x), math.sin(x)]
    assert np.allclose(s, expected, atol=1e-13)


@settings(max_examples=50, deadline=None)
@given(points)
def test_tanh_derivatives(x):
    t = math.tanh(x)
    d = taylor.tanh(Jet.variable(np.array(x), 2)).derivatives()
    assert d[1] == pytest.approx(1.0 - t * t, abs=1e-13)
    assert d[2] == pytest.approx(-2.0 * t * (1.0 - t * t), abs=1e-13)


@settings(max_examples=50, deadline=None)
@given(st.floats(min_value=0.1, max_value=5.0))
def test_log_inverts_exp(x):
    j = Jet.variable(np.array(x), 4)
    back = taylor.log(taylor.exp(j)).derivatives()
    assert np.allclose(back, [x, 1.0, 0.0, 0.0, 0.0], atol=1e-11)


@settings(max_examples=50, deadline=None)
@given(st.floats(min_value=0.1, max_value=5.0))
def test_sqrt_and_division(x):
    j = Jet.variable(np.array(x), 3)
    r = taylor.sqrt(j)
    assert np.allclose((r * r).derivatives(), j.derivatives(), atol=1e-12)
    inv = (1.0 / j).derivatives()
    assert np.allclose(inv, [1 / x, -1 / x**2, 2 / x**3, -6 / x**4], rtol=1e-12)


def test_domain_errors():
    with pytest.raises(JetDomainError):
        taylor.log(Jet.variable(np.array([-1.0]), 1))
    with pytest.raises(JetDomainError):
        taylor.sqrt(Jet.variable(np.array([0.0]), 1))


def test_non_integer_power():
    d = taylor.power(Jet.variable(np.array(4.0), 2), 0.5).derivatives()
    assert np.allclose(d, [2.0, 0.25, -1.0 / 32.0])


def test_vectorized_shape():
    t = Jet.variable(np.linspace(0.0, 1.0, 7).reshape(7, 1), 2)
    assert taylor.sin(t).derivatives().shape == (3, 7, 1)
