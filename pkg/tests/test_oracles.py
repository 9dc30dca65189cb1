# tests/test_oracles.py

import json
import math

import pytest

from mirror_mass.oracles.registry import (
    REGISTRY,
    STABILITY,
    available_records,
    load_record,
    main,
    oracle_integral,
)
from mirror_mass.physics.closed_forms import EULER_GAMMA, mu0_closed_form


STORED = ["gamma_integral", "log2d", "mu0_uniform", "step_coefficient"]


def test_stored_records_are_registered():
    assert set(STORED) <= set(available_records()) <= set(REGISTRY)
    for name in available_records():
        record = load_record(name)
        assert record.name == name
        assert record.method


def test_record_provenance_is_consistent():
    for name in available_records():
        record = load_record(name)
        assert record.source in ("computed", "closed_form")
        if record.source == "computed":
            assert record.nodes > 0
            assert record.refinement_delta is not None
            assert record.refinement_delta <= STABILITY * max(1.0, abs(record.value))
        else:
            # seeded values make no claim about a quadrature run
            assert record.nodes == 0
            assert "closed_form" in record.extra or name == "step_coefficient"


def test_records_agree_with_closed_forms():
    assert load_record("gamma_integral").value == pytest.approx(-EULER_GAMMA, rel=1e-12)
    log2d = load_record("log2d")
    assert log2d.value == pytest.approx(-2.0 * EULER_GAMMA, rel=1e-12)
    mu0 = load_record("mu0_uniform")
    assert mu0.value == pytest.approx(mu0_closed_form(mu0.inputs["a"]), rel=1e-10)


def test_cheap_records_recompute_exactly():
    fresh = oracle_integral("step_coefficient")
    stored = load_record("step_coefficient")
    assert fresh.inputs == stored.inputs
    assert fresh.source == stored.source == "closed_form"
    assert fresh.value == pytest.approx(stored.value, rel=1e-12)


def test_step_record_checks_both_forms():
    record = oracle_integral("step_coefficient", {"beta_i": -0.3, "beta_f": 0.6, "a": 2.0})
    assert record.refinement_delta < 1e-15
    assert record.value > 0.0


def test_kernel_oracle_approaches_the_coincidence_limit():
    record = oracle_integral("kernel_diag")
    assert record.source == "computed"
    assert record.refinement_delta <= STABILITY
    eps, omega, tau = (record.inputs[k] for k in ("eps", "omega", "tau"))
    alpha = eps * omega * math.cos(omega * tau)
    alpha_dot = -eps * omega**2 * math.sin(omega * tau)
    alpha_ddot = -eps * omega**3 * math.cos(omega * tau)
    value = record.value
    k = value["gaps"].index(5e-4)
    # O(Δ²) away from the limit
    assert value["gsum"][k] == pytest.approx(-alpha * alpha_dot / 3.0, abs=1e-8)
    assert value["gplus"][k] == pytest.approx((alpha_ddot - alpha * alpha_dot) / 6.0, abs=1e-8)
    assert value["gminus"][k] == pytest.approx(-(alpha_ddot + alpha * alpha_dot) / 6.0, abs=1e-8)


def test_unknown_oracle():
    with pytest.raises(KeyError, match="unknown oracle"):
        oracle_integral("zeta")


def test_cli_lists_and_dry_runs(capsys):
    assert main([]) == 0
    listed = capsys.readouterr().out
    assert all(name in listed for name in REGISTRY)
    assert "kernel_diag: no stored record" in listed

    assert main(["step_coefficient", "--dry-run"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["name"] == "step_coefficient"

    assert main(["zeta"]) == 1
    assert "unknown oracle" in capsys.readouterr().err


@pytest.mark.oracle
def test_gamma_integral_regenerates():
    record = oracle_integral("gamma_integral")
    assert record.value == pytest.approx(-EULER_GAMMA, rel=1e-10)
    assert record.refinement_delta <= 1e-10
    assert record.source == "computed" and record.nodes > 0


@pytest.mark.oracle
@pytest.mark.parametrize("a", [0.5, 2.0])
def test_uniform_mass_shift_regenerates(a):
    record = oracle_integral("mu0_uniform", {"a": a})
    assert record.value == pytest.approx(mu0_closed_form(a), rel=1e-9)


@pytest.mark.oracle
def test_log2d_scales_like_its_closed_form():
    a = 1.0
    record = oracle_integral("log2d", {"a": a})
    # ∬ ln(u-v)² e^{-a(u+v)/2} = (8/a²)(-γ + ln 2 - ln a)
    expected = 8.0 / a**2 * (-EULER_GAMMA + math.log(2.0) - math.log(a))
    assert record.value == pytest.approx(expected, rel=1e-9)
