# mirror_mass/physics/trajectory.py

"""
Mirror worldlines in null coordinates z± = z⁰ ± z¹, parametrized by proper time.

Every trajectory is defined through its rapidity η(τ), so ż⁺ = e^{η},
ż⁻ = e^{-η} and ż⁺ż⁻ = 1 hold by construction; α = η̇ is the proper
acceleration. Consumers use the vectorized primitives `rapidity` and
`position`; `state` packages one point for inspection.
"""

from __future__ import annotations

import abc
import logging
import math
import threading
from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Callable, Dict, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import roots_legendre

from mirror_mass.errors import TrajectoryError
from mirror_mass.utils import taylor
from mirror_mass.utils.expression import (
    ProfileSpec,
    evaluate_with_derivatives,
    parse,
    to_source,
)
from mirror_mass.utils.taylor import Jet

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]
# eta_fn(tau, order) -> array of shape (order + 1, *tau.shape)
DerivativeFn = Callable[[np.ndarray, int], np.ndarray]

MAX_ORDER = 3


@lru_cache(maxsize=None)
def gauss_legendre(n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [0, 1]."""
    x, w = roots_legendre(n)
    return 0.5 * (x + 1.0), 0.5 * w


# ----------------------------
# Domain types
# ----------------------------
@dataclass(frozen=True)
class WorldlinePoint:
    zplus: float
    zminus: float


@dataclass(frozen=True)
class TrajectoryState:
    tau: float
    z: WorldlinePoint
    d1plus: float
    d1minus: float
    d2plus: float
    d2minus: float
    d3plus: float
    d3minus: float
    d4plus: float
    d4minus: float
    eta: float
    alpha: float


# ----------------------------
# Interface
# ----------------------------
class Trajectory(abc.ABC):
    """
    breakpoints: proper times where η jumps (z is not C¹ there).
    knots: proper times where η stops being analytic (breakpoints included);
        integration domains are split there.
    uniform_before: α = 0 exactly for τ < uniform_before (math.inf for
        uniform motion, None if the past is never uniform).
    """

    breakpoints: Tuple[float, ...] = ()
    knots: Tuple[float, ...] = ()
    uniform_before: Optional[float] = None

    @abc.abstractmethod
    def rapidity(self, tau: ArrayLike, order: int = 0) -> np.ndarray:
        """Returns η and its first `order` derivatives stacked along axis 0."""

    @abc.abstractmethod
    def position(self, tau: ArrayLike) -> Tuple[np.ndarray, np.ndarray]:
        """Returns (z⁺, z⁻) at tau."""

    @abc.abstractmethod
    def descriptor(self) -> Dict[str, Any]:
        """JSON-safe description accepted by from_descriptor()."""

    @property
    def is_sharp(self) -> bool:
        return bool(self.breakpoints)

    def knots_between(self, lo: float, hi: float) -> np.ndarray:
        k = np.asarray(self.knots, dtype=float)
        return k[(k > lo) & (k < hi)]

    def state(self, tau: float) -> TrajectoryState:
        tau = float(tau)
        if not math.isfinite(tau):
            raise TrajectoryError("tau must be finite")
        d = self.rapidity(tau, MAX_ORDER)
        zp, zm = self.position(tau)
        eta, alpha, alpha_dot, alpha_ddot = (float(v) for v in d)
        values = (eta, alpha, alpha_dot, alpha_ddot, float(zp), float(zm))
        if not all(math.isfinite(v) for v in values):
            raise TrajectoryError(f"non-finite trajectory derivative at tau={tau}")
        ep, em = math.exp(eta), math.exp(-eta)
        return TrajectoryState(
            tau=tau,
            z=WorldlinePoint(float(zp), float(zm)),
            d1plus=ep,
            d1minus=em,
            d2plus=alpha * ep,
            d2minus=-alpha * em,
            d3plus=(alpha_dot + alpha**2) * ep,
            d3minus=(-alpha_dot + alpha**2) * em,
            d4plus=(alpha_ddot + 3 * alpha * alpha_dot + alpha**3) * ep,
            d4minus=(-alpha_ddot + 3 * alpha * alpha_dot - alpha**3) * em,
            eta=eta,
            alpha=alpha,
        )

    def null_separation(self, tau1: ArrayLike, tau2: ArrayLike):
        zp1, zm1 = self.position(tau1)
        zp2, zm2 = self.position(tau2)
        same = np.asarray(tau1) == np.asarray(tau2)
        dzp = np.where(same, 0.0, zp1 - zp2)
        dzm = np.where(same, 0.0, zm1 - zm2)
        if np.ndim(dzp) == 0:
            return float(dzp), float(dzm)
        return dzp, dzm

    def rescale(self, lam: float) -> "Trajectory":
        if not lam > 0 or not math.isfinite(lam):
            raise ValueError("lambda must be > 0")
        if lam == 1.0:
            return self
        return self._rescaled(float(lam))

    def _rescaled(self, lam: float) -> "Trajectory":
        return RescaledTrajectory(self, lam)


def _stack(order: int, eta: np.ndarray, *derivs: np.ndarray) -> np.ndarray:
    if not 0 <= order <= MAX_ORDER:
        raise ValueError(f"order must be in [0, {MAX_ORDER}]")
    out = np.zeros((order + 1,) + np.shape(eta))
    out[0] = eta
    for k, d in enumerate(derivs[:order], start=1):
        out[k] = d
    return out


# ----------------------------
# Families
# ----------------------------
class Uniform(Trajectory):
    uniform_before = math.inf

    def __init__(self, beta: float = 0.0):
        if not -1.0 < beta < 1.0:
            raise TrajectoryError("beta must be in (-1, 1)")
        self.beta = float(beta)
        self.eta0 = math.atanh(self.beta)

    def rapidity(self, tau, order=0):
        t = np.asarray(tau, dtype=float)
        return _stack(order, np.full(t.shape, self.eta0))

    def position(self, tau):
        t = np.asarray(tau, dtype=float)
        return math.exp(self.eta0) * t, math.exp(-self.eta0) * t

    def descriptor(self):
        return {"family": "uniform", "beta": self.beta}

    def _rescaled(self, lam):
        return self

    def __repr__(self) -> str:
        return f"Uniform(beta={self.beta})"


def _expm1_over(x: np.ndarray, rate: float) -> np.ndarray:
    if rate == 0.0:
        return x
    return np.expm1(rate * x) / rate


class Hyperbolic(Trajectory):
    """η = α₀τ for τ ≥ τ₀, frozen at α₀τ₀ before; z⁺ = (e^{α₀τ} - 1)/α₀."""

    def __init__(self, alpha0: float, tau0: float = -math.inf):
        if not math.isfinite(alpha0):
            raise TrajectoryError("alpha0 must be finite")
        if tau0 is None:
            tau0 = -math.inf
        if math.isnan(tau0) or tau0 == math.inf:
            raise TrajectoryError("tau0 must be finite or -inf")
        self.alpha0 = float(alpha0)
        self.tau0 = float(tau0)
        if math.isfinite(self.tau0):
            self.knots = (self.tau0,)
            self.uniform_before = self.tau0

    @classmethod
    def smooth(cls, alpha0: float, tau0: float, ramp: float) -> "AlphaProfile":
        """Acceleration switched on by a C∞ smoothstep over [tau0, tau0 + ramp]."""
        if ramp <= 0:
            raise TrajectoryError("ramp must be > 0")

        def alpha_fn(t: np.ndarray, order: int) -> np.ndarray:
            s = smoothstep((t - tau0) / ramp - 0.5, order)
            scale = ramp ** -np.arange(order + 1, dtype=float)
            return alpha0 * s * scale.reshape((-1,) + (1,) * (s.ndim - 1))

        return AlphaProfile(
            alpha_fn,
            uniform_before=tau0,
            scale=min(ramp, 1.0 / abs(alpha0) if alpha0 else ramp),
            knots=(tau0, tau0 + ramp),
            info={"family": "hyperbolic", "alpha0": alpha0, "tau0": tau0, "ramp": ramp},
            rescaler=lambda lam: cls.smooth(alpha0 / lam, lam * tau0, lam * ramp),
        )

    def rapidity(self, tau, order=0):
        t = np.asarray(tau, dtype=float)
        inside = t >= self.tau0
        tt = np.where(inside, t, self.tau0)
        return _stack(
            order,
            self.alpha0 * tt,
            np.where(inside, self.alpha0, 0.0),
            np.zeros(t.shape),
            np.zeros(t.shape),
        )

    def position(self, tau):
        t = np.asarray(tau, dtype=float)
        a0 = self.alpha0
        zp = _expm1_over(t, a0)
        zm = _expm1_over(t, -a0)
        if math.isfinite(self.tau0):
            t0 = self.tau0
            zp0 = float(_expm1_over(np.asarray(t0), a0))
            zm0 = float(_expm1_over(np.asarray(t0), -a0))
            before = t < t0
            zp = np.where(before, zp0 + math.exp(a0 * t0) * (t - t0), zp)
            zm = np.where(before, zm0 + math.exp(-a0 * t0) * (t - t0), zm)
        return zp, zm

    def descriptor(self):
        tau0 = self.tau0 if math.isfinite(self.tau0) else None
        return {"family": "hyperbolic", "alpha0": self.alpha0, "tau0": tau0}

    def _rescaled(self, lam):
        return Hyperbolic(self.alpha0 / lam, lam * self.tau0)

    def __repr__(self) -> str:
        return f"Hyperbolic(alpha0={self.alpha0}, tau0={self.tau0})"


# below this distance from the ramp ends the smoothstep is 0 or 1 to ~1e-43
_STEP_CUT = 0.01


def smoothstep(x: ArrayLike, order: int = 0) -> np.ndarray:
    """
    C∞ unit step s(x) = φ(x+½)/(φ(x+½)+φ(½-x)), φ(t) = e^{-1/t}, rising over
    [-½, ½]. Returns s and its derivatives in x stacked along axis 0.
    """
    x = np.asarray(x, dtype=float)
    flat = x.ravel()
    out = np.zeros((order + 1, flat.size))
    out[0] = np.where(flat > 0.0, 1.0, 0.0)
    inner = (flat + 0.5 > _STEP_CUT) & (0.5 - flat > _STEP_CUT)
    if np.any(inner):
        t = Jet.variable(flat[inner], order)
        pu = taylor.exp(-1.0 / (t + 0.5))
        pv = taylor.exp(-1.0 / (0.5 - t))
        out[:, inner] = (pu / (pu + pv)).derivatives()
    return out.reshape((order + 1,) + x.shape)


class _CumulativeIntegral:
    """
    F(τ) = ∫_{origin}^{τ} f(s) ds for vector-valued f, from a lazily extended
    table of checkpoints. Panels are accepted when 20- and 10-node
    Gauss-Legendre agree; extension is serialized by a lock.
    """

    def __init__(
        self,
        fn: Callable[[np.ndarray], np.ndarray],
        *,
        origin: float,
        panel: float,
        knots: Sequence[float] = (),
        tol: float = 1e-13,
    ):
        self._fn = fn
        self.origin = float(origin)
        self.panel = float(panel)
        self._knots = np.sort(np.asarray(knots, dtype=float))
        self._tol = tol
        width = np.atleast_2d(fn(np.array([self.origin]))).shape[0]
        self._table = (np.array([self.origin]), np.zeros((width, 1)))
        self._lock = threading.Lock()

    def _rule(self, lo: float, hi: float, n: int) -> np.ndarray:
        x, w = gauss_legendre(n)
        vals = np.atleast_2d(self._fn(lo + (hi - lo) * x))
        return (hi - lo) * (vals @ w)

    def _panel(self, lo: float, direction: int, h: float) -> Tuple[float, np.ndarray, float]:
        # returns (new edge, integral over the panel, next panel length)
        while True:
            hi = lo + direction * h
            between = self._knots[(self._knots - lo) * direction > 0]
            if between.size:
                nearest = between[np.argmin(np.abs(between - lo))]
                if abs(nearest - lo) < h:
                    hi = float(nearest)
            a, b = (lo, hi) if direction > 0 else (hi, lo)
            fine = self._rule(a, b, 20)
            coarse = self._rule(a, b, 10)
            if not np.all(np.isfinite(fine)):
                raise TrajectoryError(f"non-finite integrand near tau={lo}")
            err = np.max(np.abs(fine - coarse))
            if err <= self._tol * (abs(b - a) + np.max(np.abs(fine))) or h < self.panel * 2.0**-30:
                if h < self.panel * 2.0**-30:
                    logger.warning("position table: panel at tau=%g did not converge", lo)
                return hi, direction * fine, min(2.0 * h, self.panel)
            h *= 0.5

    def _extend(self, target: float) -> None:
        with self._lock:
            edges, cum = self._table
            if edges[0] <= target <= edges[-1]:
                return
            new_edges = list(edges)
            new_cum = [c for c in cum.T]
            h = self.panel
            while target > new_edges[-1]:
                hi, piece, h = self._panel(new_edges[-1], +1, h)
                new_edges.append(hi)
                new_cum.append(new_cum[-1] + piece)
            h = self.panel
            while target < new_edges[0]:
                lo, piece, h = self._panel(new_edges[0], -1, h)
                new_edges.insert(0, lo)
                new_cum.insert(0, new_cum[0] + piece)
            self._table = (np.array(new_edges), np.stack(new_cum, axis=1))

    def __call__(self, tau: ArrayLike) -> np.ndarray:
        t = np.asarray(tau, dtype=float)
        flat = t.ravel()
        if flat.size and not np.all(np.isfinite(flat)):
            raise TrajectoryError("tau must be finite")
        if flat.size:
            self._extend(float(flat.min()))
            self._extend(float(flat.max()))
        edges, cum = self._table
        j = np.clip(np.searchsorted(edges, flat, side="right") - 1, 0, len(edges) - 1)
        base = edges[j]
        x, w = gauss_legendre(20)
        nodes = base[:, None] + (flat - base)[:, None] * x[None, :]
        vals = np.atleast_2d(self._fn(nodes.ravel())).reshape(cum.shape[0], flat.size, x.size)
        partial = (vals @ w) * (flat - base)[None, :]
        out = cum[:, j] + partial
        return out.reshape((cum.shape[0],) + t.shape)


class RapidityProfile(Trajectory):
    """
    Trajectory from a user rapidity function eta_fn(tau, order). Positions come
    from anchored quadrature of e^{±η}; before `uniform_before` the rapidity is
    frozen at its value there.
    """

    def __init__(
        self,
        eta_fn: DerivativeFn,
        *,
        uniform_before: Optional[float] = None,
        anchor: float = 0.0,
        scale: float = 1.0,
        knots: Sequence[float] = (),
        breakpoints: Sequence[float] = (),
        info: Optional[Dict[str, Any]] = None,
        rescaler: Optional[Callable[[float], Trajectory]] = None,
    ):
        if scale <= 0 or not math.isfinite(scale):
            raise TrajectoryError("scale must be > 0")
        self._eta_fn = eta_fn
        self.uniform_before = None if uniform_before is None else float(uniform_before)
        self.anchor = self.uniform_before if self.uniform_before is not None else float(anchor)
        all_knots = set(float(k) for k in knots) | set(float(b) for b in breakpoints)
        if self.uniform_before is not None:
            all_knots.add(self.uniform_before)
        self.knots = tuple(sorted(all_knots))
        self.breakpoints = tuple(sorted(float(b) for b in breakpoints))
        self._info = info or {"family": "profile"}
        self._rescaler = rescaler
        self._positions = _CumulativeIntegral(
            self._null_velocities, origin=self.anchor, panel=0.25 * scale, knots=self.knots
        )

    def _null_velocities(self, s: np.ndarray) -> np.ndarray:
        eta = self.rapidity(s, 0)[0]
        return np.stack([np.exp(eta), np.exp(-eta)])

    def rapidity(self, tau, order=0):
        if not 0 <= order <= MAX_ORDER:
            raise ValueError(f"order must be in [0, {MAX_ORDER}]")
        t = np.asarray(tau, dtype=float)
        if self.uniform_before is None:
            return np.asarray(self._eta_fn(t, order), dtype=float)
        before = t < self.uniform_before
        d = np.array(self._eta_fn(np.where(before, self.uniform_before, t), order), dtype=float)
        if order:
            d[1:] = np.where(before, 0.0, d[1:])
        return d

    def position(self, tau):
        t = np.asarray(tau, dtype=float)
        if self.uniform_before is None:
            z = self._positions(t)
            return z[0], z[1]
        ub = self.uniform_before
        z = self._positions(np.maximum(t, ub))
        eta_ub = float(self.rapidity(ub, 0)[0])
        extra = np.minimum(t - ub, 0.0)
        return z[0] + math.exp(eta_ub) * extra, z[1] + math.exp(-eta_ub) * extra

    def descriptor(self):
        return dict(self._info)

    def _rescaled(self, lam):
        if self._rescaler is not None:
            return self._rescaler(lam)
        return RescaledTrajectory(self, lam)


class AlphaProfile(RapidityProfile):
    """
    Trajectory from a proper-acceleration function alpha_fn(tau, order);
    η is recovered by quadrature with η = eta0 at the anchor (uniform_before
    when given).
    """

    def __init__(
        self,
        alpha_fn: DerivativeFn,
        *,
        uniform_before: Optional[float] = None,
        anchor: float = 0.0,
        eta0: float = 0.0,
        scale: float = 1.0,
        knots: Sequence[float] = (),
        info: Optional[Dict[str, Any]] = None,
        rescaler: Optional[Callable[[float], Trajectory]] = None,
    ):
        self._alpha_fn = alpha_fn
        self.eta0 = float(eta0)
        origin = float(uniform_before) if uniform_before is not None else float(anchor)
        extra_knots = tuple(knots) + ((origin,) if uniform_before is not None else ())
        self._eta_table = _CumulativeIntegral(
            lambda s: np.asarray(alpha_fn(s, 0), dtype=float)[0:1],
            origin=origin,
            panel=0.25 * scale,
            knots=extra_knots,
        )
        super().__init__(
            self._eta_from_alpha,
            uniform_before=uniform_before,
            anchor=anchor,
            scale=scale,
            knots=knots,
            info=info,
            rescaler=rescaler,
        )

    def _eta_from_alpha(self, t: np.ndarray, order: int) -> np.ndarray:
        out = np.zeros((order + 1,) + np.shape(t))
        out[0] = self.eta0 + self._eta_table(t)[0]
        if order:
            out[1:] = np.asarray(self._alpha_fn(t, order - 1), dtype=float)
        return out


class VelocityStep(RapidityProfile):
    """
    η = η_i + (η_f - η_i)·s(τ/w) with s the C∞ smoothstep of `smoothstep`.
    w = 0 is an instantaneous velocity change with a breakpoint at τ = 0
    (right-continuous rapidity).
    """

    def __init__(self, beta_i: float, beta_f: float, width: float = 0.0):
        for name, beta in (("beta_i", beta_i), ("beta_f", beta_f)):
            if not -1.0 < beta < 1.0:
                raise TrajectoryError(f"{name} must be in (-1, 1)")
        if width < 0 or not math.isfinite(width):
            raise TrajectoryError("width must be >= 0")
        self.beta_i, self.beta_f, self.width = float(beta_i), float(beta_f), float(width)
        self.eta_i, self.eta_f = math.atanh(self.beta_i), math.atanh(self.beta_f)
        info = {"family": "step", "beta_i": self.beta_i, "beta_f": self.beta_f, "width": self.width}
        half = 0.5 * self.width
        super().__init__(
            self._step_rapidity,
            uniform_before=-half,
            scale=self.width if self.width > 0 else 1.0,
            knots=(-half, half) if self.width > 0 else (),
            breakpoints=() if self.width > 0 else (0.0,),
            info=info,
        )

    def _step_rapidity(self, t: np.ndarray, order: int) -> np.ndarray:
        jump = self.eta_f - self.eta_i
        if self.width == 0.0:
            eta = np.where(t >= 0.0, self.eta_f, self.eta_i)
            return _stack(order, eta)
        s = smoothstep(t / self.width, order)
        scale = self.width ** -np.arange(order + 1, dtype=float)
        d = jump * s * scale.reshape((-1,) + (1,) * (s.ndim - 1))
        d[0] += self.eta_i
        return d

    def rapidity(self, tau, order=0):
        if self.width == 0.0:
            # the frozen past would pick up the post-jump value at τ = 0
            return self._step_rapidity(np.asarray(tau, dtype=float), order)
        return super().rapidity(tau, order)

    def position(self, tau):
        t = np.asarray(tau, dtype=float)
        if self.width == 0.0:
            eta = np.where(t >= 0.0, self.eta_f, self.eta_i)
            return np.exp(eta) * t, np.exp(-eta) * t
        half = 0.5 * self.width
        zp, zm = super().position(np.minimum(t, half))
        after = np.maximum(t - half, 0.0)
        return zp + math.exp(self.eta_f) * after, zm + math.exp(-self.eta_f) * after

    def _rescaled(self, lam):
        return VelocityStep(self.beta_i, self.beta_f, lam * self.width)

    def __repr__(self) -> str:
        return f"VelocityStep(beta_i={self.beta_i}, beta_f={self.beta_f}, width={self.width})"


class RescaledTrajectory(Trajectory):
    """z±_new(τ) = λ·z±(τ/λ) for trajectories without a closed-form rescaling."""

    def __init__(self, base: Trajectory, lam: float):
        self.base = base
        self.lam = float(lam)
        self.breakpoints = tuple(lam * b for b in base.breakpoints)
        self.knots = tuple(lam * k for k in base.knots)
        ub = base.uniform_before
        self.uniform_before = ub if ub is None or not math.isfinite(ub) else lam * ub

    def rapidity(self, tau, order=0):
        d = self.base.rapidity(np.asarray(tau, dtype=float) / self.lam, order)
        scale = self.lam ** -np.arange(order + 1, dtype=float)
        return d * scale.reshape((-1,) + (1,) * (d.ndim - 1))

    def position(self, tau):
        zp, zm = self.base.position(np.asarray(tau, dtype=float) / self.lam)
        return self.lam * zp, self.lam * zm

    def descriptor(self):
        return {"family": "rescaled", "scale": self.lam, "base": self.base.descriptor()}

    def _rescaled(self, lam):
        return self.base.rescale(self.lam * lam)


# ----------------------------
# Profiles from expressions
# ----------------------------
def compile_profile(
    spec: Union[ProfileSpec, str],
    uniform_before: Optional[float] = None,
    *,
    scale: float = 1.0,
) -> RapidityProfile:
    """
    Build a trajectory from a parsed (or source) profile. `alpha` profiles are
    integrated to η with η = 0 at uniform_before (or at τ = 0 without one).
    """
    if isinstance(spec, str):
        spec = parse(spec)
    info = {"family": "profile", "source": to_source(spec), "uniform_before": uniform_before}

    def derivs(t: np.ndarray, order: int) -> np.ndarray:
        return evaluate_with_derivatives(spec, t, order)

    if spec.kind == "alpha":
        return AlphaProfile(derivs, uniform_before=uniform_before, scale=scale, info=info)
    return RapidityProfile(derivs, uniform_before=uniform_before, scale=scale, info=info)


def from_descriptor(desc: Dict[str, Any]) -> Trajectory:
    """Inverse of Trajectory.descriptor()."""
    family = desc.get("family")
    if family == "uniform":
        return Uniform(float(desc.get("beta", 0.0)))
    if family == "hyperbolic":
        tau0 = desc.get("tau0")
        tau0 = -math.inf if tau0 is None else float(tau0)
        if desc.get("ramp"):
            return Hyperbolic.smooth(float(desc["alpha0"]), tau0, float(desc["ramp"]))
        return Hyperbolic(float(desc["alpha0"]), tau0)
    if family == "step":
        return VelocityStep(
            float(desc["beta_i"]), float(desc["beta_f"]), float(desc.get("width", 0.0))
        )
    if family == "profile":
        ub = desc.get("uniform_before")
        return compile_profile(
            str(desc["source"]),
            None if ub is None else float(ub),
            scale=float(desc.get("scale", 1.0)),
        )
    if family == "rescaled":
        return from_descriptor(desc["base"]).rescale(float(desc["scale"]))
    raise TrajectoryError(f"unknown trajectory family: {family!r}")


# ----------------------------
# Operations
# ----------------------------
def state(traj: Trajectory, tau: float) -> TrajectoryState:
    return traj.state(tau)


def null_separation(traj: Trajectory, tau1, tau2):
    return traj.null_separation(tau1, tau2)


def rescale(traj: Trajectory, lam: float) -> Trajectory:
    return traj.rescale(lam)
