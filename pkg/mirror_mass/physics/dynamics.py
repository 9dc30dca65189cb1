# mirror_mass/physics/dynamics.py

"""
Free mirror motion under the backreaction of its own mass shift:

    m_total·η̇ = F⁺ - F⁻,   ṁ_total = -(F⁺ + F⁻)

With F± = (a/8π)(±α + R±), where R± only depend on the strict past, the
first equation is solved for α = η̇ at every evaluation:

    α = (a/8π)·(R⁺ - R⁻) / (m_total - a/4π)

The past is a prescribed prefix before tau_start followed by the computed
nodes, joined by a cubic Hermite interpolant in (η, α). Stepping is Heun
predictor-corrector with a final evaluation at the corrected node.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from mirror_mass.config.settings import SETTINGS
from mirror_mass.errors import ConvergenceError, NegativeMassError, TrajectoryError
from mirror_mass.physics.massshift import Coupling, flux_remainders, mu_direct
from mirror_mass.physics.quadrature import QuadratureSpec
from mirror_mass.physics.trajectory import (
    MAX_ORDER,
    Trajectory,
    WorldlinePoint,
    gauss_legendre,
)

logger = logging.getLogger(__name__)

# Gauss-Legendre nodes per history interval for z±
_POSITION_NODES = 8


class HistoryTrajectory(Trajectory):
    """
    Prefix trajectory for τ < tau_start, interpolated solver nodes after.
    Nodes are appended by the stepper; the last one may be replaced while a
    step is being corrected.
    """

    def __init__(self, prefix: Trajectory, tau_start: float):
        self.prefix = prefix
        self.tau_start = float(tau_start)
        self.breakpoints = tuple(b for b in prefix.breakpoints if b < self.tau_start)
        self.knots = tuple(k for k in prefix.knots if k < self.tau_start) + (self.tau_start,)
        ub = prefix.uniform_before
        self.uniform_before = None if ub is None else min(ub, self.tau_start)
        eta0 = float(prefix.rapidity(self.tau_start, 0)[0])
        zp0, zm0 = prefix.position(self.tau_start)
        self._tau: List[float] = [self.tau_start]
        self._eta: List[float] = [eta0]
        self._alpha: List[float] = [0.0]
        self._zp: List[float] = [float(zp0)]
        self._zm: List[float] = [float(zm0)]
        self._spline: Optional[CubicHermiteSpline] = None

    # ----------------------------
    # Node management
    # ----------------------------
    @property
    def nodes(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        return np.array(self._tau), np.array(self._eta), np.array(self._alpha)

    @property
    def last_tau(self) -> float:
        return self._tau[-1]

    def _rebuild(self) -> None:
        if len(self._tau) > 1:
            self._spline = CubicHermiteSpline(self._tau, self._eta, self._alpha)
        else:
            self._spline = None

    def set_last_alpha(self, alpha: float) -> None:
        self._alpha[-1] = float(alpha)
        self._rebuild()
        if len(self._tau) > 1:
            self._zp[-1], self._zm[-1] = self._advance(len(self._tau) - 2)

    def append(self, tau: float, eta: float, alpha: float) -> None:
        if tau <= self._tau[-1]:
            raise TrajectoryError("history nodes must increase in tau")
        self._tau.append(float(tau))
        self._eta.append(float(eta))
        self._alpha.append(float(alpha))
        self._zp.append(math.nan)
        self._zm.append(math.nan)
        self._rebuild()
        self._zp[-1], self._zm[-1] = self._advance(len(self._tau) - 2)

    def replace_last(self, eta: float, alpha: float) -> None:
        self._eta[-1] = float(eta)
        self._alpha[-1] = float(alpha)
        self._rebuild()
        self._zp[-1], self._zm[-1] = self._advance(len(self._tau) - 2)

    def _advance(self, k: int) -> Tuple[float, float]:
        """z± at node k + 1 from node k."""
        lo, hi = self._tau[k], self._tau[k + 1]
        x, w = gauss_legendre(_POSITION_NODES)
        eta = self._spline(lo + (hi - lo) * x)
        h = hi - lo
        return self._zp[k] + h * float(w @ np.exp(eta)), self._zm[k] + h * float(w @ np.exp(-eta))

    # ----------------------------
    # Trajectory interface
    # ----------------------------
    def _local(self, t: np.ndarray, order: int) -> np.ndarray:
        if self._spline is None:
            dt = t - self._tau[0]
            return np.stack(
                [self._eta[0] + self._alpha[0] * dt, np.full(t.shape, self._alpha[0])]
                + [np.zeros(t.shape)] * (order - 1)
            )[: order + 1]
        return np.stack([self._spline(t, nu) for nu in range(order + 1)])

    def rapidity(self, tau, order=0):
        if not 0 <= order <= MAX_ORDER:
            raise ValueError(f"order must be in [0, {MAX_ORDER}]")
        t = np.asarray(tau, dtype=float)
        before = t < self.tau_start
        out = np.zeros((order + 1,) + t.shape)
        if np.any(before):
            out[:, before] = self.prefix.rapidity(t[before], order)
        if np.any(~before):
            out[:, ~before] = self._local(t[~before], order)
        return out

    def position(self, tau):
        t = np.asarray(tau, dtype=float)
        zp, zm = np.zeros(t.shape), np.zeros(t.shape)
        before = t < self.tau_start
        if np.any(before):
            zp[before], zm[before] = self.prefix.position(t[before])
        after = ~before
        if np.any(after):
            ta = t[after]
            nodes = np.array(self._tau)
            k = np.clip(np.searchsorted(nodes, ta, side="right") - 1, 0, len(nodes) - 1)
            base = nodes[k]
            x, w = gauss_legendre(_POSITION_NODES)
            s = base[:, None] + (ta - base)[:, None] * x[None, :]
            eta = self._local(s.ravel(), 0)[0].reshape(s.shape)
            h = ta - base
            zp[after] = np.array(self._zp)[k] + h * (np.exp(eta) @ w)
            zm[after] = np.array(self._zm)[k] + h * (np.exp(-eta) @ w)
        return zp, zm

    def descriptor(self) -> Dict[str, Any]:
        return {
            "family": "history",
            "prefix": self.prefix.descriptor(),
            "tau_start": self.tau_start,
            "nodes": len(self._tau),
        }


# ----------------------------
# Domain types
# ----------------------------
@dataclass(frozen=True)
class DynamicsConfig:
    """
    bare_mass: m > 0, in units of 1/length.
    initial: trajectory for τ < tau_start (uniform, or a prescribed kick).
    dtau: requested step; must resolve the memory kernel, dtau <= 0.1/a.
    """

    a: float
    initial: Trajectory
    bare_mass: float = SETTINGS.dynamics.bare_mass
    tau_start: float = 0.0
    dtau: Optional[float] = None
    spec: QuadratureSpec = field(default_factory=QuadratureSpec)

    def __post_init__(self):
        Coupling(self.a)
        if not self.bare_mass > 0:
            raise ValueError("bare_mass must be > 0")
        if self.dtau is None:
            object.__setattr__(self, "dtau", SETTINGS.dynamics.step_fraction / self.a)
        if not self.dtau > 0:
            raise ValueError("dtau must be > 0")
        if self.dtau > 0.1 / self.a * (1.0 + 1e-12):
            raise ValueError("dtau must be <= 0.1/a to resolve the memory kernel")
        if self.initial.uniform_before is None:
            raise ValueError("initial trajectory needs a uniform past")


@dataclass(frozen=True)
class DynamicsState:
    tau: float
    eta: float
    z: WorldlinePoint
    m_total: float
    alpha: float
    m_dot: float
    flux_plus: float
    flux_minus: float
    error: float = 0.0
    converged: bool = True
    history: Optional[HistoryTrajectory] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Rates:
    eta_dot: float
    m_dot: float
    flux_plus: float
    flux_minus: float
    error: float
    converged: bool


@dataclass
class DynamicsSeries:
    config: DynamicsConfig
    states: List[DynamicsState] = field(default_factory=list)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(s, name) for s in self.states], dtype=float)

    @property
    def tau(self) -> np.ndarray:
        return self.column("tau")

    @property
    def mu(self) -> np.ndarray:
        return self.column("m_total") - self.config.bare_mass

    @property
    def converged(self) -> bool:
        return all(s.converged for s in self.states)

    def conservation_residual(self) -> np.ndarray:
        """(m_{n+1} - m_n)/h + trapezoidal mean of (F⁺ + F⁻), per step."""
        if len(self.states) < 2:
            return np.zeros(0)
        m = self.column("m_total")
        flux = self.column("flux_plus") + self.column("flux_minus")
        h = np.diff(self.tau)
        return np.diff(m) / h + 0.5 * (flux[1:] + flux[:-1])


# ----------------------------
# Operations
# ----------------------------
def _check_mass(tau: float, m_total: float, a: float) -> None:
    if not m_total > 0:
        raise NegativeMassError(
            f"total mass became non-positive at tau={tau:g}: {m_total:g}",
            tau=tau, m_total=m_total,
        )
    if not m_total > a / (4.0 * math.pi):
        raise NegativeMassError(
            f"effective inertia m_total - a/4π is non-positive at tau={tau:g}",
            tau=tau, m_total=m_total,
        )


def _solve_rates(history: HistoryTrajectory, tau: float, m_total: float, config: DynamicsConfig) -> Rates:
    a = config.a
    _check_mass(tau, m_total, a)
    r_plus, r_minus, error, ok = flux_remainders(history, tau, a, config.spec)
    c = a / (8.0 * math.pi)
    alpha = c * (r_plus - r_minus) / (m_total - 2.0 * c)
    flux_plus = c * (alpha + r_plus)
    flux_minus = c * (-alpha + r_minus)
    if not ok:
        logger.warning("flux quadrature did not converge at tau=%g", tau)
    return Rates(alpha, -(flux_plus + flux_minus), flux_plus, flux_minus, c * error, ok)


def derive_rates(state: DynamicsState, config: DynamicsConfig) -> Tuple[float, float]:
    """(η̇, ṁ) at state.tau from the recorded history."""
    if state.history is None or state.history.last_tau < state.tau:
        raise ValueError("history must cover the state")
    r = _solve_rates(state.history, state.tau, state.m_total, config)
    return r.eta_dot, r.m_dot


def _state(history: HistoryTrajectory, tau: float, eta: float, m_total: float, r: Rates) -> DynamicsState:
    zp, zm = history.position(tau)
    return DynamicsState(
        tau=tau,
        eta=eta,
        z=WorldlinePoint(float(zp), float(zm)),
        m_total=m_total,
        alpha=r.eta_dot,
        m_dot=r.m_dot,
        flux_plus=r.flux_plus,
        flux_minus=r.flux_minus,
        error=r.error,
        converged=r.converged,
        history=history,
    )


def initial_state(config: DynamicsConfig) -> DynamicsState:
    """State at tau_start, with m_total = m + μ of the prescribed prefix."""
    history = HistoryTrajectory(config.initial, config.tau_start)
    tau = config.tau_start
    mu = mu_direct(config.initial, tau, config.a, config.spec)
    m_total = config.bare_mass + mu
    r = _solve_rates(history, tau, m_total, config)
    history.set_last_alpha(r.eta_dot)
    return _state(history, tau, history.nodes[1][-1], m_total, r)


def step(state: DynamicsState, h: float, config: DynamicsConfig) -> DynamicsState:
    """One Heun step: predict, evaluate, correct, evaluate."""
    history = state.history
    tau = state.tau + h
    eta_p = state.eta + h * state.alpha
    m_p = state.m_total + h * state.m_dot
    history.append(tau, eta_p, state.alpha)
    rp = _solve_rates(history, tau, m_p, config)

    eta_c = state.eta + 0.5 * h * (state.alpha + rp.eta_dot)
    m_c = state.m_total + 0.5 * h * (state.m_dot + rp.m_dot)
    history.replace_last(eta_c, rp.eta_dot)
    rc = _solve_rates(history, tau, m_c, config)
    history.set_last_alpha(rc.eta_dot)
    return _state(history, tau, eta_c, m_c, rc)


def evolve(config: DynamicsConfig, tau_end: float, *, strict: bool = False) -> DynamicsSeries:
    """
    Integrate from config.tau_start to tau_end with equal steps no longer
    than config.dtau. With strict=True a non-converged flux evaluation raises
    ConvergenceError carrying the partial series.
    """
    span = float(tau_end) - config.tau_start
    if not span > 0:
        raise ValueError("tau_end must be > tau_start")
    n = max(1, int(math.ceil(span / config.dtau - 1e-9)))
    h = span / n
    series = DynamicsSeries(config)
    state = initial_state(config)
    series.states.append(state)
    logger.info("evolving %d steps of %g from tau=%g", n, h, config.tau_start)
    for i in range(1, n + 1):
        state = step(state, h, config)
        series.states.append(state)
        if strict and not state.converged:
            raise ConvergenceError(f"flux quadrature failed at tau={state.tau:g}", result=series)
        logger.debug(
            "tau=%g eta=%.6g m_total=%.12g alpha=%.3g", state.tau, state.eta, state.m_total, state.alpha
        )
    return series
