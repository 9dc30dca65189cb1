# mirror_mass/physics/massshift.py

"""
Mass shift μ(τ) of a partially transmitting mirror and its rate μ̇(τ).

Rates:
    strong  μ̇ = -(a/8π) ∬ ∂₁∂₂(K⁺ + K⁻) E
    weak    μ̇ = -(a/8π) [ (a²/4) ∬ (K⁺ + K⁻) E - a ∫ (K⁺ + K⁻)(s, τ) e^{a(s-τ)/2} ds ]
with E = exp(a((τ₁+τ₂)/2 - τ)) over the past (-inf, τ]. The fluxes F± carry
the K± terms with the opposite sign, so F⁺ + F⁻ = -μ̇. They are integrated as
the pair (K⁺ - K⁻, K⁺ + K⁻), which makes that sum exact.

μ(τ) is accumulated from the last uniform proper time, where it vanishes.
The direct evaluator integrates the logarithm of the null separations instead.
"""

from __future__ import annotations

import concurrent.futures as futures
import logging
import math
import os
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate

from mirror_mass.config.settings import SETTINGS
from mirror_mass.errors import RenormalizationError, SmoothnessError
from mirror_mass.physics.kernel import kernel_components
from mirror_mass.physics.quadrature import (
    IntegralResult,
    QuadratureSpec,
    integrate_history_1d,
    integrate_history_2d,
    integrate_log_singular,
)
from mirror_mass.physics.trajectory import Trajectory, Uniform

logger = logging.getLogger(__name__)

FORMS = ("auto", "strong", "weak")
METHODS = ("accumulate", "direct")


# ----------------------------
# Domain types
# ----------------------------
@dataclass(frozen=True)
class Coupling:
    a: float

    def __post_init__(self):
        if not (self.a > 0 and math.isfinite(self.a)):
            raise ValueError("a must be > 0")


@dataclass(frozen=True)
class RateEvaluation:
    """μ̇ and the flux pair at one proper time; `error` bounds all three."""

    tau: float
    mu_dot: float
    flux_plus: float
    flux_minus: float
    error: float
    converged: bool = True


@dataclass(frozen=True)
class MassShiftSample:
    tau: float
    mu: float
    mu_dot: float
    flux_plus: float
    flux_minus: float
    alpha: float
    err: float
    converged: bool = True

    def as_dict(self) -> Dict[str, float]:
        return {
            "tau": self.tau,
            "mu": self.mu,
            "mu_dot": self.mu_dot,
            "flux_plus": self.flux_plus,
            "flux_minus": self.flux_minus,
            "alpha": self.alpha,
            "err": self.err,
        }


@dataclass(frozen=True)
class MassShiftSeries:
    samples: Tuple[MassShiftSample, ...]
    coupling: Coupling
    trajectory: Dict[str, Any]
    method: str = "accumulate"
    spec: QuadratureSpec = field(default_factory=QuadratureSpec)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(s, name) for s in self.samples], dtype=float)

    @property
    def tau(self) -> np.ndarray:
        return self.column("tau")

    @property
    def mu(self) -> np.ndarray:
        return self.column("mu")

    @property
    def mu_dot(self) -> np.ndarray:
        return self.column("mu_dot")

    @property
    def converged(self) -> bool:
        return all(s.converged for s in self.samples)

    def __len__(self) -> int:
        return len(self.samples)


# ----------------------------
# Helpers
# ----------------------------
def _check_a(a: float) -> float:
    return Coupling(float(a)).a


def _resolve_form(traj: Trajectory, form: str) -> str:
    if form not in FORMS:
        raise ValueError(f"form must be one of {FORMS}")
    if form == "auto":
        return "weak" if traj.is_sharp else "strong"
    if form == "strong" and traj.is_sharp:
        raise SmoothnessError(
            "strong form needs a C³ trajectory; use the weak form across velocity jumps"
        )
    return form


def _damping(t1: np.ndarray, t2: np.ndarray, tau: float, a: float) -> np.ndarray:
    return np.exp(a * (0.5 * (t1 + t2) - tau))


def worker_count(threads: int) -> int:
    """0 means all available cores."""
    if threads < 0:
        raise ValueError("threads must be >= 0")
    return threads or os.cpu_count() or 1


def parallel_map(fn: Callable, items: Sequence, threads: int) -> List:
    """Ordered map over a thread pool; one worker runs inline."""
    n = worker_count(threads)
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with futures.ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


def _is_quiet(traj: Trajectory, tau: float) -> bool:
    ub = traj.uniform_before
    return ub is not None and tau <= ub


# ----------------------------
# Rates
# ----------------------------
def _strong_pair(traj: Trajectory, tau: float, a: float, spec: QuadratureSpec):
    def g(t1, t2):
        k = kernel_components(traj, t1, t2, a=a, spec=spec, mixed=True)
        e = _damping(t1, t2, tau, a)
        return np.stack([k.gdiff * e, k.gsum * e])

    return integrate_history_2d(g, tau, a, spec, symmetric=True, knots=traj.knots)


def _weak_pair(traj: Trajectory, tau: float, a: float, spec: QuadratureSpec):
    """R_D and R_S, the weak-form remainders of K⁺ - K⁻ and K⁺ + K⁻."""

    def g(t1, t2):
        k = kernel_components(traj, t1, t2, a=a, spec=spec)
        e = _damping(t1, t2, tau, a)
        return np.stack([k.kdiff * e, k.ksum * e])

    def f(s):
        k = kernel_components(traj, s, tau, a=a, spec=spec)
        w = np.exp(0.5 * a * (s - tau))
        return np.stack([k.kdiff * w, k.ksum * w])

    area = integrate_history_2d(g, tau, a, spec, symmetric=True, knots=traj.knots)
    line = integrate_history_1d(f, tau, a, spec, knots=traj.knots)
    remainders = []
    for two_d, one_d in zip(area, line):
        value = 0.25 * a * a * two_d.value - a * one_d.value
        error = 0.25 * a * a * two_d.total_error + a * one_d.total_error
        remainders.append((value, error, two_d.converged and one_d.converged))
    return remainders


def evaluate_rates(
    traj: Trajectory,
    tau: float,
    a: float,
    spec: Optional[QuadratureSpec] = None,
    *,
    form: str = "auto",
) -> RateEvaluation:
    """μ̇ together with F⁺ and F⁻ at tau."""
    a = _check_a(a)
    spec = spec or QuadratureSpec()
    tau = float(tau)
    form = _resolve_form(traj, form)
    if _is_quiet(traj, tau):
        return RateEvaluation(tau, 0.0, 0.0, 0.0, 0.0)
    c = a / (8.0 * math.pi)
    if form == "strong":
        diff, total = _strong_pair(traj, tau, a, spec)
        i_d, i_s = diff.value, total.value
        error = c * (diff.total_error + total.total_error)
        ok = diff.converged and total.converged
        flux_plus = c * 0.5 * (i_s + i_d)
        flux_minus = c * 0.5 * (i_s - i_d)
        mu_dot = -c * i_s
    else:
        (r_d, e_d, ok_d), (r_s, e_s, ok_s) = _weak_pair(traj, tau, a, spec)
        alpha = float(traj.rapidity(tau, 1)[1])
        error = c * (e_d + e_s)
        ok = ok_d and ok_s
        flux_plus = c * (alpha + 0.5 * (r_s + r_d))
        flux_minus = c * (-alpha + 0.5 * (r_s - r_d))
        mu_dot = -c * r_s
    if not ok:
        logger.warning("rate quadrature did not converge at tau=%g", tau)
    return RateEvaluation(tau, mu_dot, flux_plus, flux_minus, error, ok)


def mu_dot_strong(traj: Trajectory, tau: float, a: float, spec: Optional[QuadratureSpec] = None) -> float:
    """
    -(a/8π)·∬ ∂₁∂₂(K⁺+K⁻)·E over (-inf, τ]².
    Raises SmoothnessError on trajectories with velocity jumps.
    """
    return evaluate_rates(traj, tau, a, spec, form="strong").mu_dot


def mu_dot_weak(traj: Trajectory, tau: float, a: float, spec: Optional[QuadratureSpec] = None) -> float:
    """Integration-by-parts form of mu_dot_strong; needs only piecewise-C¹ worldlines."""
    return evaluate_rates(traj, tau, a, spec, form="weak").mu_dot


def flux_pair(
    traj: Trajectory,
    tau: float,
    a: float,
    spec: Optional[QuadratureSpec] = None,
    *,
    form: str = "auto",
) -> Tuple[float, float]:
    """(F⁺, F⁻) with F⁺ + F⁻ = -μ̇; the weak form is used automatically for sharp trajectories."""
    r = evaluate_rates(traj, tau, a, spec, form=form)
    return r.flux_plus, r.flux_minus


def flux_remainders(
    traj: Trajectory, tau: float, a: float, spec: Optional[QuadratureSpec] = None
) -> Tuple[float, float, float, bool]:
    """
    Weak-form remainders (R⁺, R⁻) with F± = (a/8π)(±α(τ) + R±), plus their
    error bound and convergence flag. R± depend on the strict past only.
    """
    a = _check_a(a)
    spec = spec or QuadratureSpec()
    if _is_quiet(traj, tau):
        return 0.0, 0.0, 0.0, True
    (r_d, e_d, ok_d), (r_s, e_s, ok_s) = _weak_pair(traj, float(tau), a, spec)
    return 0.5 * (r_s + r_d), 0.5 * (r_s - r_d), e_d + e_s, ok_d and ok_s


# ----------------------------
# Direct evaluation
# ----------------------------
def evaluate_direct(
    traj: Trajectory,
    tau: float,
    a: float,
    spec: Optional[QuadratureSpec] = None,
    *,
    subtract_mu0: bool = True,
) -> IntegralResult:
    """
    μ = (a²/8π) ∫ ln(Δz⁺Δz⁻)(s, τ) e^{a(s-τ)/2} ds - (a³/32π) ∬ ln(Δz⁺Δz⁻) E.

    With Δz⁺Δz⁻ = Δ²·(p m), the ln Δ² parts are trajectory independent and add
    up to μ₀; with subtract_mu0 only the ln(p m) parts are integrated. Without
    it the ln Δ² parts are integrated numerically, not taken from closed form.
    """
    a = _check_a(a)
    spec = spec or QuadratureSpec()
    tau = float(tau)
    c1, c2 = a * a / (8.0 * math.pi), a**3 / (32.0 * math.pi)

    def f(s):
        k = kernel_components(traj, s, tau, a=a, spec=spec, log_pm=True)
        return k.log_pm * np.exp(0.5 * a * (s - tau))

    def g(t1, t2):
        k = kernel_components(traj, t1, t2, a=a, spec=spec, log_pm=True)
        return k.log_pm * _damping(t1, t2, tau, a)

    parts: List[Tuple[float, IntegralResult]] = []
    if not _is_quiet(traj, tau):
        parts.append((c1, integrate_history_1d(f, tau, a, spec, knots=traj.knots)))
        parts.append((-c2, integrate_history_2d(g, tau, a, spec, symmetric=True, knots=traj.knots)))
    if not subtract_mu0:
        line = integrate_log_singular(
            lambda s: 2.0 * math.exp(0.5 * a * (s - tau)), tau, (-math.inf, tau), spec, a=a
        )

        def log_sq(t1, t2):
            with np.errstate(divide="ignore"):
                return np.log((t1 - t2) ** 2) * _damping(t1, t2, tau, a)

        area = integrate_history_2d(log_sq, tau, a, spec, symmetric=True, diagonal="log")
        parts += [(c1, line), (-c2, area)]
    value = math.fsum(c * r.value for c, r in parts)
    error = sum(abs(c) * r.error_estimate for c, r in parts)
    tail = sum(abs(c) * r.tail_bound for c, r in parts)
    evals = sum(r.evaluations for _, r in parts)
    ok = all(r.converged for _, r in parts)
    return IntegralResult(value, error, tail, evals, ok)


def mu_direct(
    traj: Trajectory,
    tau: float,
    a: float,
    spec: Optional[QuadratureSpec] = None,
    *,
    subtract_mu0: bool = True,
) -> float:
    """μ₁ + μ₂ - μ₀ from the two-point function; subtract_mu0=False keeps μ₀."""
    return evaluate_direct(traj, tau, a, spec, subtract_mu0=subtract_mu0).value


def mu0_numeric(a: float, spec: Optional[QuadratureSpec] = None, *, beta: float = 0.0) -> float:
    """Quadrature counterpart of mu0_closed_form(a)."""
    return mu_direct(Uniform(beta), 0.0, a, spec, subtract_mu0=False)


# ----------------------------
# Accumulation
# ----------------------------
def _history_edges(traj: Trajectory, grid: np.ndarray) -> np.ndarray:
    ub = float(traj.uniform_before)
    top = grid[-1]
    edges = {ub} | {float(t) for t in grid if t > ub}
    edges |= {float(k) for k in traj.knots if ub < k < top}
    return np.array(sorted(edges))


class _RateCache:
    """Rates by proper time, filled in concurrent batches in a fixed order."""

    def __init__(self, rate: Callable[[float], RateEvaluation], threads: int):
        self._rate = rate
        self._threads = threads
        self._values: Dict[float, RateEvaluation] = {}

    def fill(self, taus: Iterable[float]) -> None:
        missing = sorted({float(t) for t in taus} - self._values.keys())
        for t, r in zip(missing, parallel_map(self._rate, missing, self._threads)):
            self._values[t] = r

    def __getitem__(self, tau: float) -> RateEvaluation:
        tau = float(tau)
        if tau not in self._values:
            self.fill([tau])
        return self._values[tau]

    @property
    def converged(self) -> bool:
        return all(r.converged for r in self._values.values())


def _simpson_points(lo: float, hi: float) -> Tuple[float, ...]:
    h = hi - lo
    return lo, lo + 0.25 * h, lo + 0.5 * h, lo + 0.75 * h, hi


def _simpson_level(cache: _RateCache, pieces, tol_per_length: float, max_depth: int):
    """One refinement level of adaptive Simpson for every open piece."""
    cache.fill(t for lo, hi, _ in pieces for t in _simpson_points(lo, hi))
    done, open_ = [], []
    for lo, hi, depth in pieces:
        f = [cache[t].mu_dot for t in _simpson_points(lo, hi)]
        h = hi - lo
        whole = h / 6.0 * (f[0] + 4.0 * f[2] + f[4])
        halves = h / 12.0 * (f[0] + 4.0 * f[1] + 2.0 * f[2] + 4.0 * f[3] + f[4])
        delta = halves - whole
        rate_err = h * max(cache[t].error for t in _simpson_points(lo, hi))
        if abs(delta) <= 15.0 * tol_per_length * h or depth >= max_depth:
            if depth >= max_depth and abs(delta) > 15.0 * tol_per_length * h:
                logger.warning("accumulation hit max depth on [%g, %g]", lo, hi)
            done.append((lo, halves + delta / 15.0, abs(delta) / 15.0 + rate_err))
        else:
            mid = 0.5 * (lo + hi)
            open_ += [(lo, mid, depth + 1), (mid, hi, depth + 1)]
    return done, open_


def _quad_interval(cache: _RateCache, lo: float, hi: float, tol: float, spec: QuadratureSpec):
    """Gauss-Kronrod for pieces starting at a knot, where μ̇ may be log singular."""
    res = integrate.quad(
        lambda t: cache[t].mu_dot, lo, hi,
        epsabs=tol, epsrel=spec.rel_tol, limit=100, full_output=1,
    )
    value, err = float(res[0]), float(res[1])
    if len(res) > 3:
        logger.warning("accumulation on [%g, %g]: %s", lo, hi, res[3])
    return value, err


def _accumulate(
    traj: Trajectory, edges: np.ndarray, a: float, spec: QuadratureSpec, cache: _RateCache
) -> Dict[float, Tuple[float, float]]:
    """Running (μ, error) at every edge."""
    series = SETTINGS.series
    tol_per_length = series.accumulation_tol * a * a
    knots = set(traj.knots)
    intervals = list(zip(edges[:-1], edges[1:]))
    smooth = [(lo, hi, 0) for lo, hi in intervals if lo not in knots]
    pieces: List[Tuple[float, float, float]] = []
    while smooth:
        done, smooth = _simpson_level(cache, smooth, tol_per_length, series.max_depth)
        pieces += done
    for lo, hi in intervals:
        if lo in knots:
            value, err = _quad_interval(cache, lo, hi, tol_per_length * (hi - lo), spec)
            pieces.append((lo, value, err))
    pieces.sort(key=lambda p: p[0])

    out = {float(edges[0]): (0.0, 0.0)}
    values: List[float] = []
    errors: List[float] = []
    j = 0
    for hi in edges[1:]:
        while j < len(pieces) and pieces[j][0] < hi:
            values.append(pieces[j][1])
            errors.append(pieces[j][2])
            j += 1
        out[float(hi)] = (math.fsum(values), math.fsum(errors))
    return out


def mu_series(
    traj: Trajectory,
    a: float,
    tau_grid: Sequence[float],
    spec: Optional[QuadratureSpec] = None,
    *,
    method: str = "accumulate",
    form: str = "auto",
    threads: int = 0,
) -> MassShiftSeries:
    """
    Samples of μ, μ̇ and the flux pair on an increasing tau_grid.

    accumulate: μ(τ) = ∫ μ̇ from uniform_before, adaptive Simpson between grid
        points and knots, error estimates summed into `err`.
    direct: μ from evaluate_direct at each grid point.

    Raises RenormalizationError when the trajectory has no uniform past.
    """
    a = _check_a(a)
    spec = spec or QuadratureSpec()
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}")
    grid = np.asarray(tau_grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError("tau_grid must be a non-empty 1-D sequence")
    if grid.size > 1 and np.any(np.diff(grid) <= 0):
        raise ValueError("tau_grid must be strictly increasing")
    if not np.all(np.isfinite(grid)):
        raise ValueError("tau_grid must be finite")
    ub = traj.uniform_before
    if ub is None:
        raise RenormalizationError(
            "trajectory has no uniform past; the renormalized mass shift is undefined"
        )
    form = _resolve_form(traj, form)
    cache = _RateCache(lambda t: evaluate_rates(traj, t, a, spec, form=form), threads)
    alphas = traj.rapidity(grid, 1)[1]

    active = grid[grid > ub]
    running: Dict[float, Tuple[float, float]] = {}
    direct: Dict[float, IntegralResult] = {}
    if active.size:
        cache.fill(active)
        if method == "accumulate":
            running = _accumulate(traj, _history_edges(traj, grid), a, spec, cache)
        else:
            results = parallel_map(lambda t: evaluate_direct(traj, t, a, spec), list(active), threads)
            direct = dict(zip((float(t) for t in active), results))

    samples = []
    for t, alpha in zip(grid, alphas):
        t = float(t)
        if t <= ub:
            samples.append(MassShiftSample(t, 0.0, 0.0, 0.0, 0.0, float(alpha), 0.0))
            continue
        r = cache[t]
        if method == "accumulate":
            mu, err = running[t]
            ok = r.converged
        else:
            d = direct[t]
            mu, err, ok = d.value, d.total_error, d.converged and r.converged
        samples.append(
            MassShiftSample(t, mu, r.mu_dot, r.flux_plus, r.flux_minus, float(alpha), err, ok)
        )
    if not cache.converged:
        logger.warning("some rate evaluations did not converge")
    return MassShiftSeries(tuple(samples), Coupling(a), traj.descriptor(), method, spec)


def mu_at(
    traj: Trajectory, tau: float, a: float, spec: Optional[QuadratureSpec] = None, **kw
) -> float:
    return mu_series(traj, a, [tau], spec, **kw).samples[0].mu


# ----------------------------
# Early-time fit after a velocity jump
# ----------------------------
@dataclass(frozen=True)
class StepFit:
    coefficient: float
    linear: float
    residual: float
    points: int


def fit_step_coefficient(
    tau: Sequence[float],
    mu: Sequence[float],
    a: float,
    *,
    window: Tuple[float, float] = (1e-3, 1e-2),
    jump_at: float = 0.0,
) -> StepFit:
    """
    Least-squares fit of μ = C·(-x ln x) + D·x, x = a(τ - jump_at), over the
    window of x. Returns C, D and the RMS residual.
    """
    a = _check_a(a)
    x = a * (np.asarray(tau, dtype=float) - jump_at)
    y = np.asarray(mu, dtype=float)
    # grid points land on the window ends only up to rounding
    lo, hi = window[0] * (1 - 1e-9), window[1] * (1 + 1e-9)
    inside = (x >= lo) & (x <= hi)
    if inside.sum() < 3:
        raise ValueError("need at least 3 samples inside the fit window")
    x, y = x[inside], y[inside]
    design = np.stack([-x * np.log(x), x], axis=1)
    (coef, lin), *_ = np.linalg.lstsq(design, y, rcond=None)
    residual = float(np.sqrt(np.mean((design @ np.array([coef, lin]) - y) ** 2)))
    return StepFit(float(coef), float(lin), residual, int(inside.sum()))


def step_fit_grid(a: float, window: Tuple[float, float] = (1e-3, 1e-2), points: int = 12) -> np.ndarray:
    """Logarithmic proper-time grid covering the fit window."""
    return np.geomspace(window[0], window[1], points) / a
