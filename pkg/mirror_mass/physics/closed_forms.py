# mirror_mass/physics/closed_forms.py

from __future__ import annotations

import math

import numpy as np

EULER_GAMMA = float(np.euler_gamma)

# "printed": the commonly quoted coefficients 1/24π and 1/48π of the slow-motion expansion.
# "kernel": the same expansion derived from the μ̇ kernel functional with damping
#           rate a/2; it equals 2 × printed(a/2). Numerical results follow "kernel".
CONVENTIONS = ("printed", "kernel")


def _check_a(a: float) -> None:
    if not a > 0:
        raise ValueError("a must be > 0")


def _check_convention(convention: str) -> None:
    if convention not in CONVENTIONS:
        raise ValueError(f"convention must be one of {CONVENTIONS}")


def mu0_closed_form(a: float) -> float:
    """
    Mass shift of uniform motion before subtraction, (a/4π)(-ln(a/2) - γ_E).
    Velocity independent; vanishes at a = 2e^{-γ_E}.
    """
    _check_a(a)
    return a / (4.0 * math.pi) * (-math.log(a / 2.0) - EULER_GAMMA)


def mu_dot_asymptotic(
    alpha: float, alpha_dot: float, alpha_ddot: float, a: float, *, convention: str = "printed"
) -> float:
    """
    Slow-motion expansion of μ̇ up to O(a⁻²):
        printed: (1/24π)[αα̇/a - (αα̈ + α̇²)/a²]
        kernel:  αα̇/(6πa) - (αα̈ + α̇²)/(3πa²)
    """
    _check_a(a)
    _check_convention(convention)
    first = alpha * alpha_dot
    second = alpha * alpha_ddot + alpha_dot * alpha_dot
    if convention == "printed":
        return (first / a - second / a**2) / (24.0 * math.pi)
    return first / (6.0 * math.pi * a) - second / (3.0 * math.pi * a**2)


def mu_asymptotic(alpha: float, a: float, *, convention: str = "printed") -> float:
    """Leading slow-motion mass shift, α²/(48πa) (printed) or α²/(12πa) (kernel); never negative."""
    _check_a(a)
    _check_convention(convention)
    denom = 48.0 if convention == "printed" else 12.0
    return alpha * alpha / (denom * math.pi * a)


def slow_motion_mu_dot(alpha: float, alpha_dot: float, alpha_ddot: float, a: float) -> float:
    return mu_dot_asymptotic(alpha, alpha_dot, alpha_ddot, a, convention="kernel")


def slow_motion_mu(alpha: float, a: float) -> float:
    """α²/(12πa): the leading mass shift that the numerical μ(τ) approaches for slow motion."""
    return mu_asymptotic(alpha, a, convention="kernel")


def step_coefficient(beta_i: float, beta_f: float, a: float) -> float:
    """
    Coefficient C of the early-time law μ(τ) ≈ C·(-aτ ln aτ) after a sudden
    velocity change: (a/4π)[γ_i γ_f (1 - β_i β_f) - 1] = (a/4π)(cosh Δη - 1).
    """
    _check_a(a)
    for name, beta in (("beta_i", beta_i), ("beta_f", beta_f)):
        if not -1.0 < beta < 1.0:
            raise ValueError(f"{name} must be in (-1, 1)")
    rapidity_jump = math.atanh(beta_f) - math.atanh(beta_i)
    # cosh(x) - 1 = 2 sinh²(x/2), exact near zero
    return a / (4.0 * math.pi) * 2.0 * math.sinh(0.5 * rapidity_jump) ** 2
