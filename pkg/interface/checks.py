# interface/checks.py

"""
Invariant battery behind `mirror-mass check`. Every check returns a
CheckResult; nothing here raises on a failed property.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from mirror_mass.physics.closed_forms import mu0_closed_form, slow_motion_mu_dot
from mirror_mass.physics.massshift import evaluate_rates, mu0_numeric, mu_direct
from mirror_mass.physics.quadrature import QuadratureSpec
from mirror_mass.physics.trajectory import Hyperbolic, Trajectory, Uniform, compile_profile

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    value: float
    threshold: float


def _rel(x: float, y: float) -> float:
    scale = max(abs(x), abs(y))
    return abs(x - y) / scale if scale else 0.0


def _smooth_profile(beta: float, amplitude: float, omega: float, a: float) -> Trajectory:
    """Uniform motion at beta, then a sine of the rapidity switched on at τ = 0 as τ⁵."""
    eta0 = math.atanh(beta)
    source = f"eta = {eta0!r} + {amplitude!r}*(1 - exp(-({omega!r}*tau)^2))^2*sin({omega!r}*tau)"
    return compile_profile(source, uniform_before=0.0, scale=1.0 / a)


# ----------------------------
# Checks
# ----------------------------
def check_uniform_null(a: float, spec: QuadratureSpec, quick: bool, rng) -> CheckResult:
    betas = rng.uniform(-0.95, 0.95, 5 if quick else 20)
    worst = 0.0
    for beta in betas:
        tau = float(rng.uniform(-10.0, 10.0)) / a
        for form in ("strong", "weak"):
            worst = max(worst, abs(evaluate_rates(Uniform(beta), tau, a, spec, form=form).mu_dot))
    threshold = 1e-10 * a * a
    return CheckResult("uniform_null", worst < threshold, f"max |mu_dot| over {len(betas)} betas", worst, threshold)


def check_hyperbolic_null(a: float, spec: QuadratureSpec, quick: bool, rng) -> CheckResult:
    ratios = (0.3,) if quick else (0.1, 0.3, 1.0)
    worst = 0.0
    for r in ratios:
        worst = max(worst, abs(evaluate_rates(Hyperbolic(r * a), 0.0, a, spec, form="strong").mu_dot))
    threshold = 1e-10 * a * a
    return CheckResult("hyperbolic_null", worst < threshold, f"alpha0/a in {ratios}", worst, threshold)


def check_mu0(a: float, spec: QuadratureSpec, quick: bool, rng, mu0: Callable[[float], float]) -> CheckResult:
    couplings = (2.0,) if quick else (0.5, 1.0, 2.0, 5.0)
    worst = 0.0
    for c in couplings:
        worst = max(worst, _rel(mu0_numeric(c, spec), mu0(c)))
    threshold = 1e-8
    return CheckResult("mu0_closed_form", worst < threshold, f"a in {couplings}", worst, threshold)


def check_mu0_velocity(a: float, spec: QuadratureSpec, quick: bool, rng) -> CheckResult:
    diff = _rel(mu0_numeric(a, spec, beta=0.0), mu0_numeric(a, spec, beta=0.9))
    threshold = 1e-6
    return CheckResult("mu0_velocity_independence", diff < threshold, "beta 0 vs 0.9", diff, threshold)


def check_weak_strong(a: float, spec: QuadratureSpec, quick: bool, rng) -> CheckResult:
    grid = [(0.0, 0.05, 0.2)] if quick else [
        (beta, amp, om) for beta in (0.0, 0.5) for amp, om in ((0.05, 0.2), (0.2, 0.5))
    ] + [(0.9, 0.1, 0.3)]
    worst = 0.0
    for beta, amp, om in grid:
        traj = _smooth_profile(beta, amp, om * a, a)
        tau = 6.0 / a
        strong = evaluate_rates(traj, tau, a, spec, form="strong").mu_dot
        weak = evaluate_rates(traj, tau, a, spec, form="weak").mu_dot
        worst = max(worst, _rel(strong, weak))
    threshold = 1e-6
    return CheckResult("weak_strong", worst < threshold, f"{len(grid)} smooth trajectories", worst, threshold)


def check_scaling(a: float, spec: QuadratureSpec, quick: bool, rng) -> CheckResult:
    traj = _smooth_profile(0.2, 0.1, 0.3 * a, a)
    tau = 5.0 / a
    base = mu_direct(traj, tau, a, spec)
    worst = 0.0
    for lam in ((2.0,) if quick else (0.5, 2.0, 3.0)):
        scaled = mu_direct(traj.rescale(lam), lam * tau, a / lam, spec)
        worst = max(worst, _rel(lam * scaled, base))
    threshold = 1e-6
    return CheckResult("scaling_covariance", worst < threshold, "mu(lam tau; lam z, a/lam) = mu/lam", worst, threshold)


def check_nonrelativistic(a: float, spec: QuadratureSpec, quick: bool, rng) -> CheckResult:
    omega, tau = 0.3 * a, 5.0 / a
    ratios = []
    for eps in (0.02, 0.01, 0.005):
        traj = _smooth_profile(0.0, eps, omega, a)
        ratios.append(mu_direct(traj, tau, a, spec) / eps**2)
    # Richardson: the O(eps²) correction to mu/eps² drops by 4 per halving
    extrapolated = [(4.0 * ratios[i + 1] - ratios[i]) / 3.0 for i in range(2)]
    diff = max(_rel(ratios[1], ratios[2]), _rel(*extrapolated))
    threshold = 0.05
    return CheckResult("nonrelativistic_cancellation", diff < threshold, "mu/eps² at eps 0.02, 0.01, 0.005", diff, threshold)


def check_perfect_mirror(a: float, spec: QuadratureSpec, quick: bool, rng) -> CheckResult:
    omega = 0.1
    factors = (5.0, 40.0) if quick else (5.0, 10.0, 20.0, 40.0)
    peaks = []
    for f in factors:
        c = f * omega
        traj = compile_profile(
            f"eta = 0.01*(1 - exp(-({omega!r}*tau)^2))^2*sin({omega!r}*tau)", uniform_before=0.0
        )
        taus = np.linspace(2.0, 2.0 + 2.0 * math.pi / omega, 5 if quick else 9)
        peaks.append(max(abs(mu_direct(traj, float(t), c, spec)) for t in taus))
    slope = float(np.polyfit(np.log(np.array(factors) * omega), np.log(peaks), 1)[0])
    deviation = abs(slope + 1.0)
    return CheckResult("perfect_mirror_scaling", deviation < 0.1, f"log-log slope {slope:.3f}", deviation, 0.1)


def check_slow_motion(a: float, spec: QuadratureSpec, quick: bool, rng) -> CheckResult:
    omega = 0.02 * a
    # sin⁴ leaves the uniform past with α, α̇ and α̈ continuous
    traj = compile_profile(f"eta = 0.2*sin({omega!r}*tau)^4", uniform_before=-3.0 * math.pi / omega)
    worst = 0.0
    # phases where αα̇ is far from zero
    for phase in ((0.7,) if quick else (0.7, 2.3, 3.9)):
        tau = phase / omega
        _, alpha, alpha_dot, alpha_ddot = traj.rapidity(tau, 3)
        expected = slow_motion_mu_dot(float(alpha), float(alpha_dot), float(alpha_ddot), a)
        worst = max(worst, _rel(evaluate_rates(traj, tau, a, spec).mu_dot, expected))
    threshold = 0.02
    return CheckResult("slow_motion_rate", worst < threshold, "mu_dot vs local expansion", worst, threshold)


CHECKS: Dict[str, Callable] = {
    "uniform_null": check_uniform_null,
    "hyperbolic_null": check_hyperbolic_null,
    "mu0_closed_form": check_mu0,
    "mu0_velocity_independence": check_mu0_velocity,
    "weak_strong": check_weak_strong,
    "scaling_covariance": check_scaling,
    "nonrelativistic_cancellation": check_nonrelativistic,
    "perfect_mirror_scaling": check_perfect_mirror,
    "slow_motion_rate": check_slow_motion,
}


def run_checks(
    *,
    quick: bool = False,
    names: Optional[Sequence[str]] = None,
    a: float = 1.0,
    spec: Optional[QuadratureSpec] = None,
    mu0: Callable[[float], float] = mu0_closed_form,
    seed: int = 0,
) -> List[CheckResult]:
    """
    Run the selected checks (all by default). `mu0` is the closed form the
    numerical μ₀ is compared against; tests pass a corrupted one.
    """
    spec = spec or QuadratureSpec()
    selected = list(names) if names else list(CHECKS)
    unknown = set(selected) - set(CHECKS)
    if unknown:
        raise ValueError(f"unknown checks: {sorted(unknown)}")
    rng = np.random.default_rng(seed)
    results = []
    for name in selected:
        fn = CHECKS[name]
        if name == "mu0_closed_form":
            result = fn(a, spec, quick, rng, mu0)
        else:
            result = fn(a, spec, quick, rng)
        logger.info("check %s: %s (%g vs %g)", name, "pass" if result.passed else "FAIL", result.value, result.threshold)
        results.append(result)
    return results


def format_table(results: Sequence[CheckResult]) -> str:
    width = max([len(r.name) for r in results] + [5])
    lines = [f"{'check':<{width}}  result  value        threshold  detail"]
    for r in results:
        status = "pass" if r.passed else "FAIL"
        lines.append(f"{r.name:<{width}}  {status:<6}  {r.value:<11.3e}  {r.threshold:<9.1e}  {r.detail}")
    return "\n".join(lines) + "\n"
