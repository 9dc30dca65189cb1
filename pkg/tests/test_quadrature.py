# tests/test_quadrature.py

import logging
import math

import numpy as np
import pytest

from mirror_mass.oracles.registry import load_record
from mirror_mass.physics.quadrature import (
    IntegralResult,
    QuadratureSpec,
    history_edges,
    integrate_1d,
    integrate_history_1d,
    integrate_history_2d,
    integrate_log_singular,
)


def test_spec_validation():
    with pytest.raises(ValueError, match="rel_tol must be > 0"):
        QuadratureSpec(rel_tol=0.0)
    with pytest.raises(ValueError, match="window_lambda must be >= 10"):
        QuadratureSpec(window_lambda=5.0)
    with pytest.raises(ValueError):
        QuadratureSpec(max_subdivisions=0)
    with pytest.raises(ValueError, match="unknown quadrature settings"):
        QuadratureSpec.from_overrides(tolerance=1e-3)


def test_from_overrides_ignores_none():
    spec = QuadratureSpec.from_overrides(rel_tol=None, window_lambda=30)
    assert spec.rel_tol == QuadratureSpec().rel_tol
    assert spec.window_lambda == 30
    assert spec.window(2.0) == 15.0


def test_history_edges():
    edges = history_edges(5.0, 2.0, QuadratureSpec(), knots=(4.3, 9.0, -100.0))
    assert np.all(np.diff(edges) > 0)
    assert edges[-1] == 5.0 and edges[0] == pytest.approx(5.0 - 20.0)
    assert 4.3 in edges and 9.0 not in edges
    assert 5.0 - 0.125 in edges


def test_smooth_history_integrals(spec):
    a, tau = 1.5, 0.7
    r = integrate_history_1d(lambda s: np.exp(0.5 * a * (s - tau)), tau, a, spec)
    assert isinstance(r, IntegralResult) and r.converged
    assert r.value == pytest.approx(2.0 / a, rel=1e-8)
    assert abs(2.0 / a - r.value) <= r.total_error


def test_tail_bound_covers_the_truncation():
    a, tau = 2.0, 0.0
    spec = QuadratureSpec()
    r1 = integrate_history_1d(lambda s: np.exp(0.5 * a * (s - tau)), tau, a, spec)
    assert r1.tail_bound > 0.0
    assert abs(2.0 / a - r1.value) <= r1.tail_bound + r1.error_estimate + 1e-14
    r2 = integrate_history_2d(
        lambda t1, t2: np.exp(a * (0.5 * (t1 + t2) - tau)), tau, a, spec, symmetric=True
    )
    assert abs(4.0 / a**2 - r2.value) <= r2.tail_bound + r2.error_estimate + 1e-14
    assert r2.tail_bound == pytest.approx(
        4.0 / a**2 * (2.0 * math.exp(-20.0) - math.exp(-40.0)), rel=1e-6
    )


def test_gamma_integral_matches_record(spec):
    expected = load_record("gamma_integral").value
    a, tau = 2.0, 3.0
    r = integrate_history_1d(lambda s: np.log(tau - s) * np.exp(0.5 * a * (s - tau)), tau, a, spec)
    assert r.converged
    assert r.value == pytest.approx(expected, rel=1e-7)
    q = integrate_log_singular(lambda s: math.exp(s - tau), tau, (-math.inf, tau), spec, a=a)
    assert q.value == pytest.approx(expected, rel=1e-8)


def test_log_diagonal_matches_record(spec):
    record = load_record("log2d")
    a = record.inputs["a"]
    r = integrate_history_2d(
        lambda t1, t2: np.log((t1 - t2) ** 2) * np.exp(a * (0.5 * (t1 + t2))),
        0.0, a, spec, symmetric=True, diagonal="log",
    )
    assert r.converged
    assert r.value == pytest.approx(record.value, rel=1e-7)


def test_symmetric_and_full_square_agree(spec):
    a, tau = 1.0, 0.0

    def g(t1, t2):
        return np.cos(t1 - t2) * np.exp(a * (0.5 * (t1 + t2) - tau))

    full = integrate_history_2d(g, tau, a, spec)
    half = integrate_history_2d(g, tau, a, spec, symmetric=True)
    assert full.value == pytest.approx(half.value, rel=1e-8)
    # ∬ cos(t1 - t2) e^{(t1 + t2)/2} = |∫ e^{(1/2 + i)t}|² = 1/(1/4 + 1)
    assert full.value == pytest.approx(0.8, rel=1e-7)


def test_vector_integrands_meet_their_own_tolerances(spec):
    a, tau = 1.0, 0.0
    out = integrate_history_1d(
        lambda s: np.stack([np.exp(0.5 * (s - tau)), 1e-9 * (s - tau) * np.exp(0.5 * (s - tau))]),
        tau, a, spec,
    )
    assert isinstance(out, tuple) and len(out) == 2
    assert out[0].value == pytest.approx(2.0, rel=1e-8)
    assert out[1].value == pytest.approx(-4e-9, rel=1e-7)


def test_results_are_bitwise_deterministic(spec):
    def f(s):
        return np.log(-s) * np.sin(s) * np.exp(0.5 * s)

    first = integrate_history_1d(f, 0.0, 1.0, spec)
    second = integrate_history_1d(f, 0.0, 1.0, spec)
    assert first == second


def test_knots_are_respected():
    kink = -1.3
    r = integrate_1d(lambda s: np.abs(s - kink), [-3.0, kink, 0.0], QuadratureSpec())
    assert r.value == pytest.approx(0.5 * 1.7**2 + 0.5 * 1.3**2, rel=1e-13)
    assert r.evaluations < 100


def test_non_convergence_is_reported_not_raised(caplog):
    spec = QuadratureSpec(rel_tol=1e-15, abs_tol=1e-300, max_subdivisions=1)
    with caplog.at_level(logging.WARNING, logger="mirror_mass.physics.quadrature"):
        r = integrate_history_1d(lambda s: np.log(-s) / np.sqrt(-s), 0.0, 1.0, spec)
    assert not r.converged
    assert "did not converge" in caplog.text


def test_log_singular_interior_point(spec):
    r = integrate_log_singular(lambda s: 1.0, 0.0, (-1.0, 2.0), spec)
    assert r.value == pytest.approx(2.0 * math.log(2.0) - 3.0, rel=1e-12)


def test_log_singular_point_outside_range(spec):
    r = integrate_log_singular(lambda s: 1.0, 5.0, (0.0, 1.0), spec)
    assert r.value == pytest.approx(5.0 * math.log(5.0) - 4.0 * math.log(4.0) - 1.0, rel=1e-12)
    r = integrate_log_singular(lambda s: 1.0, 0.0, (0.0, 1.0), spec)
    assert r.value == pytest.approx(-1.0, rel=1e-12)


def test_argument_errors(spec):
    with pytest.raises(ValueError):
        integrate_log_singular(lambda s: 1.0, 0.0, (1.0, 0.0), spec)
    with pytest.raises(ValueError):
        integrate_log_singular(lambda s: 1.0, 0.0, (-math.inf, 0.0), spec)
    with pytest.raises(ValueError):
        integrate_history_1d(np.exp, 0.0, 0.0, spec)
    with pytest.raises(ValueError):
        integrate_history_2d(lambda x, y: x * y, 0.0, 1.0, spec, diagonal="sqrt")
