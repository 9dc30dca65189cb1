# tests/test_checks.py

import pytest

from interface.checks import CHECKS, CheckResult, format_table, run_checks
from mirror_mass.physics.closed_forms import mu0_closed_form

CHEAP = ["uniform_null", "hyperbolic_null", "mu0_closed_form", "mu0_velocity_independence"]


def test_cheap_checks_pass():
    results = run_checks(quick=True, names=CHEAP)
    assert [r.name for r in results] == CHEAP
    for r in results:
        assert r.passed, r
        assert r.value < r.threshold


def test_corrupted_mu0_is_caught():
    results = run_checks(quick=True, names=["mu0_closed_form"], mu0=lambda a: 1.001 * mu0_closed_form(a))
    assert not results[0].passed
    assert results[0].value == pytest.approx(1e-3, rel=1e-2)


def test_checks_follow_the_coupling():
    results = run_checks(quick=True, names=["uniform_null", "hyperbolic_null"], a=3.0)
    assert all(r.passed for r in results)
    assert results[0].threshold == pytest.approx(9e-10)


def test_seed_fixes_the_sampled_velocities():
    one = run_checks(quick=True, names=["uniform_null"], seed=5)
    two = run_checks(quick=True, names=["uniform_null"], seed=5)
    assert one == two


def test_unknown_check():
    with pytest.raises(ValueError, match="unknown checks"):
        run_checks(names=["uniform_null", "gravity"])


def test_table_lists_every_result():
    results = [
        CheckResult("uniform_null", True, "ok", 1e-15, 1e-10),
        CheckResult("weak_strong", False, "drift", 3e-5, 1e-6),
    ]
    table = format_table(results)
    lines = table.splitlines()
    assert lines[0].startswith("check")
    assert "pass" in lines[1] and "FAIL" in lines[2]
    assert table.endswith("\n")


@pytest.mark.slow
def test_full_quick_battery():
    results = run_checks(quick=True)
    assert [r.name for r in results] == list(CHECKS)
    failed = [r for r in results if not r.passed]
    assert not failed, format_table(failed)
