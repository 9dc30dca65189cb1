# mirror_mass/physics/kernel.py

"""
Memory kernels K±(τ₁,τ₂) = (ż±(τ₁) - ż±(τ₂)) / (z±(τ₁) - z±(τ₂)) and their
mixed derivatives ∂τ₁∂τ₂K±.

With Δ = τ₁ - τ₂, ε = (η₁ - η₂)/2, δ(s) = η(s) - (η₁ + η₂)/2 and averages ⟨·⟩
over s in [τ₂, τ₁], p = ⟨e^δ⟩, m = ⟨e^{-δ}⟩, S = ⟨sinh δ⟩:

    K⁺ = 2 sinh ε / (Δ p)            K⁻ = -2 sinh ε / (Δ m)
    K⁺ + K⁻ = -4 sinh ε · S / (Δ p m)
    ∂₁∂₂K⁺ = A / (p³Δ²),  A = (α₁ + α₂) p - 4 sinh ε / Δ
    ∂₁∂₂K⁻ = -B / (m³Δ²), B = (α₁ + α₂) m - 4 sinh ε / Δ
    ∂₁∂₂(K⁺ + K⁻) = 2S [(α₁ + α₂) - (m² + mp + p²) B / m³] / (p³Δ²)

None of these subtracts nearly equal positions. Averages come from
Gauss-Legendre on the segment (split at knots) for short segments and from
position differences for long ones. Below δ_switch the midpoint series is used.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from mirror_mass.errors import SmoothnessError
from mirror_mass.physics.quadrature import QuadratureSpec
from mirror_mass.physics.trajectory import Trajectory, gauss_legendre

SWITCH_FACTOR = 1e-3
SWITCH_FLOOR = 1e-12
# segments longer than this many 1/a use position differences
DIRECT_SPAN = 4.0


@dataclass(frozen=True)
class KernelValue:
    kplus: float
    kminus: float
    sum: float
    mixed_deriv_sum: Optional[float] = None


@dataclass(frozen=True)
class DampingWeight:
    value: float


@dataclass(frozen=True)
class KernelArrays:
    kplus: np.ndarray
    kminus: np.ndarray
    ksum: np.ndarray
    kdiff: np.ndarray
    gplus: Optional[np.ndarray] = None
    gminus: Optional[np.ndarray] = None
    gsum: Optional[np.ndarray] = None
    gdiff: Optional[np.ndarray] = None
    log_pm: Optional[np.ndarray] = None


def damping_weight(tau1, tau2, tau: float, a: float):
    """exp(a((τ₁+τ₂)/2 - τ)) for τ₁, τ₂ <= τ."""
    if a <= 0:
        raise ValueError("a must be > 0")
    t1, t2 = np.asarray(tau1, dtype=float), np.asarray(tau2, dtype=float)
    if np.any(t1 > tau) or np.any(t2 > tau):
        raise ValueError("damping weight needs tau1, tau2 <= tau")
    value = np.exp(a * (0.5 * (t1 + t2) - tau))
    if np.ndim(value) == 0:
        return DampingWeight(float(value))
    return value


def switch_distance(alpha, alpha_dot, alpha_ddot, a: Optional[float] = None):
    """δ_switch = 1e-3 / (local rate), the rate being the largest of |α|, |α̇|^½, |α̈|^⅓ and a."""
    rate = np.maximum.reduce([
        np.abs(alpha),
        np.sqrt(np.abs(alpha_dot)),
        np.cbrt(np.abs(alpha_ddot)),
        np.full(np.shape(alpha), a if a else 1.0),
    ])
    return np.maximum(SWITCH_FACTOR / rate, SWITCH_FLOOR)


def _mixed_series(
    alpha: np.ndarray,
    alpha_dot: np.ndarray,
    alpha_ddot: np.ndarray,
    alpha_3: np.ndarray,
    alpha_4: np.ndarray,
    length: np.ndarray,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    (∂₁∂₂(K⁺ - K⁻), ∂₁∂₂(K⁺ + K⁻)) to order Δ² about the midpoint, from
    ∂₁∂₂K± = S±'/6 + Δ²(S±'''/240 + S±S±'/30) with S± = ±α̇ - α²/2.
    """
    a, ad, add = alpha, alpha_dot, alpha_ddot
    d2 = length * length
    gdiff = add / 3.0 + d2 * (alpha_4 / 120.0 - (2.0 * a * ad * ad + a * a * add) / 30.0)
    gsum = -a * ad / 3.0 + d2 * (-a * alpha_3 + 5.0 * ad * add + 4.0 * a**3 * ad) / 120.0
    return gdiff, gsum


def _stencil_derivatives(
    traj: Trajectory, mid: np.ndarray, rho: np.ndarray, alpha: np.ndarray,
    alpha_dot: np.ndarray, alpha_ddot: np.ndarray,
) -> Tuple[np.ndarray, np.ndarray]:
    """α⁽³⁾ and α⁽⁴⁾ at mid from α(mid ± ρ); zero where a knot lies inside the stencil."""
    alpha_up = traj.rapidity(mid + rho, 1)[1]
    alpha_dn = traj.rapidity(mid - rho, 1)[1]
    r2 = rho * rho
    alpha_3 = 6.0 * ((alpha_up - alpha_dn) / (2.0 * rho) - alpha_dot) / r2
    alpha_4 = 12.0 * (alpha_up + alpha_dn - 2.0 * alpha - alpha_ddot * r2) / (r2 * r2)
    smooth = np.ones(mid.shape, dtype=bool)
    for k in traj.knots:
        smooth &= np.abs(mid - k) >= rho
    return np.where(smooth, alpha_3, 0.0), np.where(smooth, alpha_4, 0.0)


def _segment_moments_gl(
    traj: Trajectory, lo: np.ndarray, hi: np.ndarray, eta_c: np.ndarray, spec: QuadratureSpec
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    knots = np.asarray(traj.knots, dtype=float)
    if knots.size:
        knots = knots[(knots > lo.min()) & (knots < hi.max())]
    cuts = np.clip(knots[None, :], lo[:, None], hi[:, None])
    edges = np.concatenate([lo[:, None], cuts, hi[:, None]], axis=1)
    q = np.arange(spec.segment_panels + 1) / spec.segment_panels
    pl, ph = edges[:, :-1, None], edges[:, 1:, None]
    panels = pl + (ph - pl) * q
    pa, pb = panels[..., :-1], panels[..., 1:]
    x, w = gauss_legendre(spec.segment_nodes)
    s = pa[..., None] + (pb - pa)[..., None] * x
    length = (hi - lo)[:, None, None, None]
    weight = (pb - pa)[..., None] * w / length
    eta_s = traj.rapidity(s.ravel(), 0)[0].reshape(s.shape)
    delta = eta_s - eta_c[:, None, None, None]
    axes = (1, 2, 3)
    p1 = np.sum(weight * np.expm1(delta), axis=axes)
    m1 = np.sum(weight * np.expm1(-delta), axis=axes)
    S = np.sum(weight * np.sinh(delta), axis=axes)
    return p1, m1, S


def _segment_moments_positions(
    traj: Trajectory, lo: np.ndarray, hi: np.ndarray, eta_c: np.ndarray
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    zp_hi, zm_hi = traj.position(hi)
    zp_lo, zm_lo = traj.position(lo)
    length = hi - lo
    p = (zp_hi - zp_lo) * np.exp(-eta_c) / length
    m = (zm_hi - zm_lo) * np.exp(eta_c) / length
    return p - 1.0, m - 1.0, 0.5 * (p - m)


def kernel_components(
    traj: Trajectory,
    tau1,
    tau2,
    *,
    a: Optional[float] = None,
    spec: Optional[QuadratureSpec] = None,
    mixed: bool = False,
    log_pm: bool = False,
) -> KernelArrays:
    """
    Vectorized kernels on broadcast (tau1, tau2). `mixed` adds ∂₁∂₂K±,
    `log_pm` adds ln(p m) = ln(Δz⁺Δz⁻/Δ²).
    """
    spec = spec or QuadratureSpec()
    t1, t2 = np.broadcast_arrays(np.asarray(tau1, dtype=float), np.asarray(tau2, dtype=float))
    shape = t1.shape
    t1, t2 = t1.ravel(), t2.ravel()
    lo, hi = np.minimum(t1, t2), np.maximum(t1, t2)
    length = hi - lo
    mid = 0.5 * (lo + hi)

    eta_lo, alpha_lo = traj.rapidity(lo, 1)
    eta_hi, alpha_hi = traj.rapidity(hi, 1)
    _, alpha_c, alpha_dot_c, alpha_ddot_c = traj.rapidity(mid, 3)

    inside_knot = np.zeros(lo.shape, dtype=bool)
    for k in traj.knots:
        inside_knot |= (lo < k) & (k < hi)
    switch = switch_distance(alpha_c, alpha_dot_c, alpha_ddot_c, a)
    series = (length < switch) & ~inside_knot
    span = DIRECT_SPAN / a if a else DIRECT_SPAN
    far = ~series & (length > span)
    near = ~series & ~far

    eta_c = 0.5 * (eta_lo + eta_hi)
    p1 = np.zeros(lo.shape)
    m1 = np.zeros(lo.shape)
    S = np.zeros(lo.shape)
    if np.any(near):
        p1[near], m1[near], S[near] = _segment_moments_gl(
            traj, lo[near], hi[near], eta_c[near], spec
        )
    if np.any(far):
        p1[far], m1[far], S[far] = _segment_moments_positions(
            traj, lo[far], hi[far], eta_c[far]
        )
    p, m = 1.0 + p1, 1.0 + m1

    with np.errstate(divide="ignore", invalid="ignore"):
        L = np.where(series, 1.0, length)
        sh = np.sinh(0.5 * (eta_hi - eta_lo))
        kplus = 2.0 * sh / (L * p)
        kminus = -2.0 * sh / (L * m)
        ksum = -4.0 * sh * S / (L * p * m)
        kdiff = 2.0 * sh * (p + m) / (L * p * m)

    h2 = (0.5 * length) ** 2
    a_c, ad, add = alpha_c, alpha_dot_c, alpha_ddot_c
    kplus = np.where(series, a_c + (add + 2 * a_c * ad) * h2 / 6.0, kplus)
    kminus = np.where(series, -a_c + (-add + 2 * a_c * ad) * h2 / 6.0, kminus)
    ksum = np.where(series, (2.0 / 3.0) * a_c * ad * h2, ksum)
    kdiff = np.where(series, 2 * a_c + add * h2 / 3.0, kdiff)

    out = dict(
        kplus=kplus.reshape(shape),
        kminus=kminus.reshape(shape),
        ksum=ksum.reshape(shape),
        kdiff=kdiff.reshape(shape),
    )

    if mixed:
        with np.errstate(divide="ignore", invalid="ignore"):
            alphas = alpha_lo + alpha_hi
            A = alphas * p - 4.0 * sh / L
            B = alphas * m - 4.0 * sh / L
            L2 = L * L
            gplus = A / (p**3 * L2)
            gminus = -B / (m**3 * L2)
            gsum = 2.0 * S * (alphas - (m * m + m * p + p * p) * B / m**3) / (p**3 * L2)
            gdiff = A / (p**3 * L2) + B / (m**3 * L2)
        if np.any(series):
            a3 = np.zeros(lo.shape)
            a4 = np.zeros(lo.shape)
            a3[series], a4[series] = _stencil_derivatives(
                traj, mid[series], switch[series], a_c[series], ad[series], add[series]
            )
            sdiff, ssum = _mixed_series(a_c, ad, add, a3, a4, length)
            gdiff = np.where(series, sdiff, gdiff)
            gsum = np.where(series, ssum, gsum)
            gplus = np.where(series, 0.5 * (sdiff + ssum), gplus)
            gminus = np.where(series, 0.5 * (ssum - sdiff), gminus)
        out["gplus"] = gplus.reshape(shape)
        out["gminus"] = gminus.reshape(shape)
        out["gsum"] = gsum.reshape(shape)
        out["gdiff"] = gdiff.reshape(shape)

    if log_pm:
        with np.errstate(divide="ignore", invalid="ignore"):
            lpm = np.log1p(p1) + np.log1p(m1)
        out["log_pm"] = np.where(series, a_c * a_c * length * length / 12.0, lpm).reshape(shape)

    return KernelArrays(**out)


def _scalar(x: np.ndarray) -> float:
    return float(np.asarray(x).reshape(-1)[0])


def kernel_K(
    traj: Trajectory,
    tau1: float,
    tau2: float,
    *,
    a: Optional[float] = None,
    spec: Optional[QuadratureSpec] = None,
    smooth: bool = False,
) -> KernelValue:
    """K± at one point. smooth=True rejects segments straddling a velocity jump."""
    if smooth:
        lo, hi = min(tau1, tau2), max(tau1, tau2)
        if any(lo < b < hi for b in traj.breakpoints):
            raise SmoothnessError("segment straddles a velocity jump; subdivide or use the weak form")
    k = kernel_components(traj, tau1, tau2, a=a, spec=spec)
    return KernelValue(_scalar(k.kplus), _scalar(k.kminus), _scalar(k.ksum))


def mixed_derivatives(
    traj: Trajectory,
    tau1,
    tau2,
    *,
    a: Optional[float] = None,
    spec: Optional[QuadratureSpec] = None,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(∂₁∂₂K⁺, ∂₁∂₂K⁻, ∂₁∂₂(K⁺+K⁻)); refuses trajectories with velocity jumps."""
    if traj.is_sharp:
        raise SmoothnessError(
            "mixed derivative undefined across velocity jumps; use the weak form"
        )
    k = kernel_components(traj, tau1, tau2, a=a, spec=spec, mixed=True)
    return k.gplus, k.gminus, k.gsum


def kernel_mixed_derivative(
    traj: Trajectory,
    tau1: float,
    tau2: float,
    *,
    a: Optional[float] = None,
    spec: Optional[QuadratureSpec] = None,
) -> float:
    return _scalar(mixed_derivatives(traj, tau1, tau2, a=a, spec=spec)[2])


def kernel_value(
    traj: Trajectory,
    tau1: float,
    tau2: float,
    *,
    a: Optional[float] = None,
    spec: Optional[QuadratureSpec] = None,
) -> KernelValue:
    """KernelValue including the mixed derivative of the sum when defined."""
    k = kernel_components(traj, tau1, tau2, a=a, spec=spec, mixed=not traj.is_sharp)
    mixed = None if k.gsum is None else _scalar(k.gsum)
    return KernelValue(_scalar(k.kplus), _scalar(k.kminus), _scalar(k.ksum), mixed)


def log_separation(traj: Trajectory, tau1, tau2, **kw) -> np.ndarray:
    """ln(Δz⁺Δz⁻) = ln Δ² + ln(p m)."""
    t1, t2 = np.asarray(tau1, dtype=float), np.asarray(tau2, dtype=float)
    k = kernel_components(traj, t1, t2, log_pm=True, **kw)
    with np.errstate(divide="ignore"):
        return np.log((t1 - t2) ** 2) + k.log_pm


def is_diagonal_series(traj: Trajectory, tau1: float, tau2: float, a: Optional[float] = None) -> bool:
    """Whether (tau1, tau2) falls in the near-diagonal series branch."""
    lo, hi = min(tau1, tau2), max(tau1, tau2)
    _, alpha, alpha_dot, alpha_ddot = traj.rapidity(0.5 * (lo + hi), 3)
    if any(lo < k < hi for k in traj.knots):
        return False
    return bool(hi - lo < switch_distance(alpha, alpha_dot, alpha_ddot, a))
