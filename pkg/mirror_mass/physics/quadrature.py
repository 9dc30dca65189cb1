# mirror_mass/physics/quadrature.py

"""
Integration over the damped past history (-inf, tau] and (-inf, tau]^2.

The history is truncated at tau - window_lambda/a; the neglected tail is
reported as a bound, never added to the value. Both schemes are adaptive
Gauss-Kronrod (7/15, tensor product in 2D) with batched refinement of the
worst regions and fixed-order compensated summation, so a given spec always
produces the same bits.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, fields, replace
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import integrate

from mirror_mass.config.settings import SETTINGS

logger = logging.getLogger(__name__)

_Q = SETTINGS.quadrature


@dataclass(frozen=True)
class QuadratureSpec:
    rel_tol: float = _Q.rel_tol
    abs_tol: float = _Q.abs_tol
    window_lambda: float = _Q.window_lambda
    max_subdivisions: int = _Q.max_subdivisions
    segment_panels: int = _Q.segment_panels
    segment_nodes: int = _Q.segment_nodes

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be > 0")
        if not self.abs_tol > 0:
            raise ValueError("abs_tol must be > 0")
        if not self.window_lambda >= 10:
            raise ValueError("window_lambda must be >= 10")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")
        if self.segment_panels < 1 or self.segment_nodes < 2:
            raise ValueError("segment_panels must be >= 1 and segment_nodes >= 2")

    @classmethod
    def from_overrides(cls, **overrides) -> "QuadratureSpec":
        """Defaults from defaults.yaml, with every non-None override applied."""
        names = {f.name for f in fields(cls)}
        unknown = set(overrides) - names
        if unknown:
            raise ValueError(f"unknown quadrature settings: {sorted(unknown)}")
        return cls(**{k: v for k, v in overrides.items() if v is not None})

    def window(self, a: float) -> float:
        return self.window_lambda / a

    def replace(self, **changes) -> "QuadratureSpec":
        return replace(self, **changes)


@dataclass(frozen=True)
class IntegralResult:
    value: float
    error_estimate: float
    tail_bound: float
    evaluations: int
    converged: bool = True

    @property
    def total_error(self) -> float:
        return self.error_estimate + self.tail_bound


Result = Union[IntegralResult, Tuple[IntegralResult, ...]]

# ----------------------------
# Gauss-Kronrod 7/15 (QUADPACK qk15)
# ----------------------------
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

NODES = np.concatenate([-_XGK[:7], [0.0], _XGK[:7][::-1]])
KRONROD_WEIGHTS = np.concatenate([_WGK[:7], [_WGK[7]], _WGK[:7][::-1]])
GAUSS_WEIGHTS = np.zeros(15)
GAUSS_WEIGHTS[[1, 3, 5]] = _WG[:3]
GAUSS_WEIGHTS[7] = _WG[3]
GAUSS_WEIGHTS[[13, 11, 9]] = _WG[:3]

# history grading in units of 1/a, measured back from tau
_GRADING = (0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0)
_DIAGONAL_LOG_LEVELS = 20


def _components(values: np.ndarray, n: int) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    if values.ndim == 1:
        return values.reshape(1, n)
    return values.reshape(values.shape[0], n)


def history_edges(tau: float, a: float, spec: QuadratureSpec, knots: Sequence[float] = ()) -> np.ndarray:
    """Ascending edges of the truncated window, graded toward tau and split at knots."""
    span = spec.window(a)
    offsets = [x / a for x in _GRADING if x / a < span] + [span]
    edges = {tau} | {tau - x for x in offsets}
    lo = tau - span
    edges |= {float(k) for k in knots if lo < k < tau}
    return np.array(sorted(edges))


# ----------------------------
# Adaptive refinement
# ----------------------------
def _refine(
    evaluate: Callable[[np.ndarray], Tuple[np.ndarray, np.ndarray]],
    split: Callable[[np.ndarray, np.ndarray], np.ndarray],
    regions: np.ndarray,
    nodes_per_region: int,
    spec: QuadratureSpec,
    rel_tol: Optional[np.ndarray] = None,
    abs_tol: Optional[np.ndarray] = None,
):
    """
    regions: (m, p) parameter rows. evaluate(rows) -> (values, errors), each (k, m).
    split(rows, selected_mask) -> child rows. Returns (values, errors, evaluations, converged).
    """
    vals, errs = evaluate(regions)
    evaluations = nodes_per_region * len(regions)
    k = vals.shape[0]
    rel = np.broadcast_to(spec.rel_tol if rel_tol is None else rel_tol, (k,))
    abs_ = np.broadcast_to(spec.abs_tol if abs_tol is None else abs_tol, (k,))
    subdivisions = 0
    while True:
        totals = np.array([math.fsum(row) for row in vals])
        err_totals = np.array([math.fsum(row) for row in errs])
        tol = np.maximum(abs_, rel * np.abs(totals))
        if np.all(err_totals <= tol):
            return totals, err_totals, evaluations, True
        budget = spec.max_subdivisions - subdivisions
        if budget <= 0:
            return totals, err_totals, evaluations, False
        score = np.max(errs / tol[:, None], axis=0)
        m = len(regions)
        selected = score > 1.0 / m
        selected[int(np.argmax(score))] = True
        if selected.sum() > budget:
            keep = np.argsort(-score, kind="stable")[:budget]
            selected = np.zeros(m, dtype=bool)
            selected[keep] = True
        subdivisions += int(selected.sum())
        children = split(regions, selected)
        cvals, cerrs = evaluate(children)
        evaluations += nodes_per_region * len(children)
        regions = np.concatenate([regions[~selected], children])
        vals = np.concatenate([vals[:, ~selected], cvals], axis=1)
        errs = np.concatenate([errs[:, ~selected], cerrs], axis=1)


def _gk_1d(f: Callable, rows: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    lo, hi = rows[:, 0], rows[:, 1]
    center, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    x = center[:, None] + half[:, None] * NODES[None, :]
    fx = _components(f(x.ravel()), x.size).reshape(-1, len(rows), 15)
    kron = half * (fx @ KRONROD_WEIGHTS)
    gauss = half * (fx @ GAUSS_WEIGHTS)
    return kron, np.abs(kron - gauss)


def _bisect(rows: np.ndarray, selected: np.ndarray) -> np.ndarray:
    lo, hi = rows[selected, 0], rows[selected, 1]
    mid = 0.5 * (lo + hi)
    return np.concatenate([np.stack([lo, mid], axis=1), np.stack([mid, hi], axis=1)])


def integrate_1d(
    f: Callable[[np.ndarray], np.ndarray],
    edges: Sequence[float],
    spec: Optional[QuadratureSpec] = None,
    *,
    rel_tol=None,
    abs_tol=None,
) -> Result:
    """
    Adaptive integral of f over [edges[0], edges[-1]], starting from the given
    partition. f takes a 1-D array and returns (n,) or (k, n) values.
    """
    spec = spec or QuadratureSpec()
    e = np.asarray(edges, dtype=float)
    rows = np.stack([e[:-1], e[1:]], axis=1)
    rows = rows[rows[:, 1] > rows[:, 0]]
    if not len(rows):
        return IntegralResult(0.0, 0.0, 0.0, 0)
    probe = np.asarray(f(np.array([0.5 * (rows[0, 0] + rows[0, 1])])))
    vector = probe.ndim == 2
    totals, errors, evals, ok = _refine(
        lambda r: _gk_1d(f, r), _bisect, rows, 15, spec, rel_tol, abs_tol
    )
    if not ok:
        logger.warning("1D quadrature did not converge: error %s", errors)
    return _pack(totals, errors, np.zeros_like(totals), evals + 1, ok, vector)


def _pack(totals, errors, tails, evals, ok, vector) -> Result:
    results = tuple(
        IntegralResult(float(v), float(e), float(t), int(evals), bool(ok))
        for v, e, t in zip(totals, errors, tails)
    )
    return results if vector else results[0]


def _tail_1d(f, tau, a, spec, envelope) -> Tuple[np.ndarray, int]:
    span = spec.window(a)
    if envelope is None:
        s = tau - span * np.array([1.0, 0.999, 0.99, 0.95])
        u = tau - s
        fs = np.abs(_components(f(s), s.size))
        weight = np.exp(0.5 * a * u) / (1.0 + np.abs(np.log(u)))
        envelope = np.max(fs * weight, axis=1)
        used = s.size
    else:
        envelope = np.atleast_1d(np.asarray(envelope, dtype=float))
        used = 0
    factor = (2.0 / a) * math.exp(-0.5 * spec.window_lambda) * (
        1.0 + abs(math.log(span)) + 2.0 / (a * span)
    )
    return envelope * factor, used


def integrate_history_1d(
    f: Callable[[np.ndarray], np.ndarray],
    tau: float,
    a: float,
    spec: Optional[QuadratureSpec] = None,
    *,
    envelope=None,
    knots: Sequence[float] = (),
    rel_tol=None,
    abs_tol=None,
) -> Result:
    """
    ∫_{-inf}^{tau} f(s) ds for f bounded by M·e^{a(s-tau)/2}·(1 + |ln(tau-s)|).
    The tail beyond tau - Λ/a is bounded by (2M/a)·e^{-Λ/2}·(1 + |ln X| + 2/(aX)),
    X = Λ/a; M is estimated from the far end of the window unless given.
    """
    if a <= 0:
        raise ValueError("a must be > 0")
    spec = spec or QuadratureSpec()
    edges = history_edges(tau, a, spec, knots)
    body = integrate_1d(f, edges, spec, rel_tol=rel_tol, abs_tol=abs_tol)
    tails, used = _tail_1d(f, tau, a, spec, envelope)
    parts = body if isinstance(body, tuple) else (body,)
    out = tuple(
        IntegralResult(r.value, r.error_estimate, float(t), r.evaluations + used, r.converged)
        for r, t in zip(parts, np.broadcast_to(tails, (len(parts),)))
    )
    return out if isinstance(body, tuple) else out[0]


# ----------------------------
# 2D
# ----------------------------
# Region rows: [kind, A, L, u0, u1, v0, v1, weight]
#   kind 0: rectangle, tau1 = u, tau2 = v
#   kind 1: lower triangle of [A, A+L]^2 (tau1 >= tau2), Duffy map
#           tau1 = A + L u, tau2 = A + L u (1 - v), jacobian L^2 u
#   kind 2: upper triangle, roles of tau1 and tau2 exchanged
_RECT, _LOWER, _UPPER = 0.0, 1.0, 2.0


def _map_2d(rows: np.ndarray, u: np.ndarray, v: np.ndarray):
    kind, A, L = rows[:, 0, None, None], rows[:, 1, None, None], rows[:, 2, None, None]
    first = A + L * u
    second = A + L * u * (1.0 - v)
    tri_jac = L * L * u
    is_rect = kind == _RECT
    is_upper = kind == _UPPER
    t1 = np.where(is_rect, u, np.where(is_upper, second, first))
    t2 = np.where(is_rect, v, np.where(is_upper, first, second))
    jac = np.where(is_rect, 1.0, tri_jac)
    return t1, t2, jac


_KK = np.outer(KRONROD_WEIGHTS, KRONROD_WEIGHTS)
_GG = np.outer(GAUSS_WEIGHTS, GAUSS_WEIGHTS)


def _gk_2d(g: Callable, rows: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    u0, u1, v0, v1, weight = rows[:, 3], rows[:, 4], rows[:, 5], rows[:, 6], rows[:, 7]
    cu, hu = 0.5 * (u0 + u1), 0.5 * (u1 - u0)
    cv, hv = 0.5 * (v0 + v1), 0.5 * (v1 - v0)
    u = (cu[:, None] + hu[:, None] * NODES[None, :])[:, :, None] * np.ones((1, 1, 15))
    v = (cv[:, None] + hv[:, None] * NODES[None, :])[:, None, :] * np.ones((1, 15, 1))
    t1, t2, jac = _map_2d(rows, u, v)
    m = len(rows)
    gx = _components(g(t1.ravel(), t2.ravel()), t1.size).reshape(-1, m, 15, 15) * jac
    scale = hu * hv * weight
    kron = scale * np.einsum("kmij,ij->km", gx, _KK)
    gauss = scale * np.einsum("kmij,ij->km", gx, _GG)
    return kron, np.abs(kron - gauss)


def _quadrisect(rows: np.ndarray, selected: np.ndarray) -> np.ndarray:
    r = rows[selected]
    um = 0.5 * (r[:, 3] + r[:, 4])
    vm = 0.5 * (r[:, 5] + r[:, 6])
    children = []
    for (ua, ub) in ((r[:, 3], um), (um, r[:, 4])):
        for (va, vb) in ((r[:, 5], vm), (vm, r[:, 6])):
            c = r.copy()
            c[:, 3], c[:, 4], c[:, 5], c[:, 6] = ua, ub, va, vb
            children.append(c)
    return np.concatenate(children)


def _initial_regions_2d(
    edges: np.ndarray, symmetric: bool, diagonal: str, a: float
) -> np.ndarray:
    rows: List[List[float]] = []
    n = len(edges) - 1
    strip = 1.0 / (16.0 * a)
    for i in range(n):
        for j in range(n):
            lo1, hi1 = edges[i], edges[i + 1]
            lo2, hi2 = edges[j], edges[j + 1]
            if i != j:
                if symmetric and i < j:
                    continue
                w = 2.0 if symmetric else 1.0
                rows.append([_RECT, 0.0, 0.0, lo1, hi1, lo2, hi2, w])
                continue
            L = hi1 - lo1
            if diagonal == "log":
                v_edges = [0.0] + [2.0**-k for k in range(_DIAGONAL_LOG_LEVELS, 0, -1)] + [1.0]
            else:
                v_edges = [0.0, min(strip / L, 0.5), 1.0] if strip < L else [0.0, 1.0]
            kinds = [(_LOWER, 2.0)] if symmetric else [(_LOWER, 1.0), (_UPPER, 1.0)]
            for kind, w in kinds:
                for va, vb in zip(v_edges[:-1], v_edges[1:]):
                    rows.append([kind, lo1, L, 0.0, 1.0, va, vb, w])
    return np.array(rows, dtype=float)


def integrate_history_2d(
    g: Callable[[np.ndarray, np.ndarray], np.ndarray],
    tau: float,
    a: float,
    spec: Optional[QuadratureSpec] = None,
    *,
    symmetric: bool = False,
    diagonal: str = "smooth",
    envelope=None,
    knots: Sequence[float] = (),
    rel_tol=None,
    abs_tol=None,
) -> Result:
    """
    ∬_{(-inf, tau]^2} g(t1, t2) dt1 dt2 for g bounded by M·e^{a((t1+t2)/2 - tau)}.

    symmetric=True integrates t1 >= t2 only and doubles it. Diagonal blocks are
    Duffy-collapsed triangles; diagonal="log" grades them geometrically for
    integrands with a logarithmic diagonal singularity. Tail bound:
    M·(4/a²)·(2e^{-Λ/2} - e^{-Λ}).
    """
    if a <= 0:
        raise ValueError("a must be > 0")
    if diagonal not in ("smooth", "log"):
        raise ValueError("diagonal must be 'smooth' or 'log'")
    spec = spec or QuadratureSpec()
    edges = history_edges(tau, a, spec, knots)
    rows = _initial_regions_2d(edges, symmetric, diagonal, a)
    probe = np.asarray(g(np.array([edges[-1]]), np.array([edges[0]])))
    vector = probe.ndim == 2
    totals, errors, evals, ok = _refine(
        lambda r: _gk_2d(g, r), _quadrisect, rows, 225, spec, rel_tol, abs_tol
    )
    if not ok:
        logger.warning("2D quadrature did not converge at tau=%g: error %s", tau, errors)

    span = spec.window(a)
    if envelope is None:
        t_far = np.full(9, tau - span)
        t_other = tau - span * np.linspace(0.0, 1.0, 9)
        damp = np.exp(0.5 * a * ((t_far - tau) + (t_other - tau)))
        gv = np.abs(_components(g(t_far, t_other), t_far.size))
        envelope = np.max(gv / damp, axis=1)
        evals += 9
    envelope = np.atleast_1d(np.asarray(envelope, dtype=float))
    lam = spec.window_lambda
    tails = envelope * (4.0 / a**2) * (2.0 * math.exp(-0.5 * lam) - math.exp(-lam))
    tails = np.broadcast_to(tails, totals.shape)
    return _pack(totals, errors, tails, evals + 1, ok, vector)


# ----------------------------
# Logarithmic endpoint singularities
# ----------------------------
def _quad(func, lo, hi, spec, **kw) -> Tuple[float, float, int, bool]:
    res = integrate.quad(
        func, lo, hi, epsabs=spec.abs_tol, epsrel=spec.rel_tol,
        limit=max(50, min(spec.max_subdivisions, 500)), full_output=1, **kw
    )
    value, err, info = res[0], res[1], res[2]
    converged = len(res) < 4
    return float(value), float(err), int(info.get("neval", 0)), converged


def integrate_log_singular(
    f_regular: Callable[[float], float],
    singular_at: float,
    tau_range: Tuple[float, float],
    spec: Optional[QuadratureSpec] = None,
    *,
    a: Optional[float] = None,
) -> IntegralResult:
    """
    ∫ f_regular(s)·ln|s - singular_at| ds over tau_range with log-weighted
    QUADPACK rules on the pieces adjacent to the singular point. The range may
    be (-inf, hi]; with a coupling the part beyond the history window is
    integrated separately without the weight.
    """
    spec = spec or QuadratureSpec()
    lo, hi = float(tau_range[0]), float(tau_range[1])
    if not hi > lo:
        raise ValueError("tau_range must be increasing")
    c = float(singular_at)

    def plain(s: float) -> float:
        return f_regular(s) * math.log(abs(s - c))

    value = error = 0.0
    evals = 0
    ok = True
    if math.isinf(lo):
        if a is None:
            raise ValueError("a semi-infinite range needs the coupling a")
        cut = min(hi, c) - spec.window(a)
        v, e, n, conv = _quad(plain, -math.inf, cut, spec)
        value, error, evals, ok = v, e, n, conv
        lo = cut
    pieces: List[Tuple[float, float]] = [(lo, c), (c, hi)] if lo < c < hi else [(lo, hi)]
    for p_lo, p_hi in pieces:
        if p_lo == c:
            v, e, n, conv = _quad(f_regular, p_lo, p_hi, spec, weight="alg-loga", wvar=(0.0, 0.0))
        elif p_hi == c:
            v, e, n, conv = _quad(f_regular, p_lo, p_hi, spec, weight="alg-logb", wvar=(0.0, 0.0))
        else:
            v, e, n, conv = _quad(plain, p_lo, p_hi, spec)
        value += v
        error += e
        evals += n
        ok = ok and conv
    if not ok:
        logger.warning("log-singular quadrature did not converge (error %g)", error)
    return IntegralResult(value, error, 0.0, evals, ok)
