# mirror_mass/oracles/registry.py

"""
Brute-force reference values for the test suite.

Integrals are recomputed by dense composite Gauss-Legendre quadrature
(compensated summation via math.fsum) at n and 2n nodes per panel and are
rejected unless both agree to 1e-10. The kernel oracle differentiates K±
numerically in 60-digit mpmath arithmetic, independently of the float kernels.

Records are JSON files in records/. `source` says where a stored value came
from: "computed" by running the oracle, with its node count and refinement
delta, or "closed_form" for a seeded value that has not been regenerated yet.

    python -m mirror_mass.oracles.registry            # list records
    python -m mirror_mass.oracles.registry log2d      # recompute and write one
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Dict, List, Optional, Tuple

import mpmath as mp
import numpy as np
from scipy.special import roots_legendre

from mirror_mass.errors import ConvergenceError
from mirror_mass.physics.closed_forms import step_coefficient

logger = logging.getLogger(__name__)

RECORDS_DIR = os.path.join(os.path.dirname(__file__), "records")
STABILITY = 1e-10
KERNEL_DPS = 60
KERNEL_STEP = "1e-12"


@dataclass(frozen=True)
class OracleRecord:
    name: str
    inputs: Dict[str, Any]
    value: Any
    method: str
    nodes: int
    refinement_delta: Optional[float] = None
    source: str = "computed"
    extra: Dict[str, Any] = field(default_factory=dict)


# ----------------------------
# Dense quadrature
# ----------------------------
def _graded_edges(upper: float, levels: int = 60, uniform_panels: int = 2000) -> np.ndarray:
    """Panels 2^-k toward 0 plus uniform panels on [1, upper]."""
    small = [2.0**-k for k in range(levels, 0, -1)]
    return np.concatenate([[0.0], small, np.linspace(1.0, upper, uniform_panels + 1)])


def _dense_nodes(edges: np.ndarray, n: int) -> Tuple[np.ndarray, np.ndarray]:
    x, w = roots_legendre(n)
    x, w = 0.5 * (x + 1.0), 0.5 * w
    lo, hi = edges[:-1, None], edges[1:, None]
    return (lo + (hi - lo) * x).ravel(), ((hi - lo) * w).ravel()


def _dense_1d(f: Callable[[np.ndarray], np.ndarray], edges: np.ndarray, n: int) -> Tuple[float, int]:
    s, w = _dense_nodes(edges, n)
    return math.fsum(w * f(s)), s.size


def _dense_2d(f: Callable[[np.ndarray, np.ndarray], np.ndarray], edges_x, edges_y, n: int) -> Tuple[float, int]:
    x, wx = _dense_nodes(edges_x, n)
    y, wy = _dense_nodes(edges_y, n)
    total = []
    for xi, wi in zip(x, wx):
        total.append(wi * math.fsum(wy * f(np.full(y.shape, xi), y)))
    return math.fsum(total), x.size * y.size


def _refined(compute: Callable[[int], Tuple[float, int]], n: int, name: str) -> Tuple[float, int, float]:
    coarse, _ = compute(n)
    fine, nodes = compute(2 * n)
    delta = abs(fine - coarse)
    if delta > STABILITY * max(1.0, abs(fine)):
        raise ConvergenceError(f"oracle {name!r} unstable under node doubling: {delta:g}")
    return fine, nodes, delta


# ----------------------------
# Records
# ----------------------------
def _gamma_integral(params: Dict[str, Any]) -> OracleRecord:
    edges = _graded_edges(60.0)
    value, nodes, delta = _refined(
        lambda n: _dense_1d(lambda x: np.log(x) * np.exp(-x), edges, n), 250, "gamma_integral"
    )
    return OracleRecord(
        "gamma_integral", {}, value,
        "∫₀^∞ ln x e^{-x} dx, graded composite Gauss-Legendre", nodes, delta,
    )


def _log2d_value(a: float, n: int) -> Tuple[float, int]:
    # u = τ - t1, v = τ - t2 ≥ 0; S = u + v, |u - v| = S w, du dv = S dS dw over w in [0, 1]
    upper = 120.0 / a
    edges_s = np.concatenate([[0.0], [upper * 2.0**-k for k in range(50, 0, -1)], np.linspace(upper / 2, upper, 41)[1:]])
    edges_w = _graded_edges(1.0, levels=50, uniform_panels=1)[:-1]
    return _dense_2d(
        lambda s, w: s * np.log((s * w) ** 2) * np.exp(-0.5 * a * s), edges_s, edges_w, n
    )


def _log2d(params: Dict[str, Any]) -> OracleRecord:
    a = float(params.get("a", 2.0))
    value, nodes, delta = _refined(lambda n: _log2d_value(a, n), 12, "log2d")
    return OracleRecord(
        "log2d", {"a": a}, value,
        "∬ ln((t1-t2)²) e^{a((t1+t2)/2-τ)} over (-inf, τ]², rotated coordinates, tensor Gauss-Legendre",
        nodes, delta,
    )


def _mu0_uniform(params: Dict[str, Any]) -> OracleRecord:
    a = float(params.get("a", 2.0))
    edges = _graded_edges(120.0 / a)
    line, n1, d1 = _refined(
        lambda n: _dense_1d(lambda u: np.log(u * u) * np.exp(-0.5 * a * u), edges, n), 250, "mu0_uniform"
    )
    area, n2, d2 = _refined(lambda n: _log2d_value(a, n), 12, "mu0_uniform")
    value = a * a / (8.0 * math.pi) * line - a**3 / (32.0 * math.pi) * area
    return OracleRecord(
        "mu0_uniform", {"a": a}, value,
        "(a²/8π)∫ln(u²)e^{-au/2}du - (a³/32π)·log2d(a) by dense quadrature",
        n1 + n2, d1 + d2,
    )


def _kernel_pair_mp(eta: Callable[[Any], Any], t1: Any, t2: Any) -> Tuple[Any, Any]:
    """K± at (t1, t2) with z± differences by tanh-sinh quadrature."""
    dzp = mp.quad(lambda s: mp.exp(eta(s)), [t2, t1])
    dzm = mp.quad(lambda s: mp.exp(-eta(s)), [t2, t1])
    kp = (mp.exp(eta(t1)) - mp.exp(eta(t2))) / dzp
    km = (mp.exp(-eta(t1)) - mp.exp(-eta(t2))) / dzm
    return kp, km


def _mixed_stencil(eta: Callable[[Any], Any], t1: Any, t2: Any, h: Any) -> Tuple[Any, Any]:
    gp = gm = mp.mpf(0)
    for s1, s2 in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
        kp, km = _kernel_pair_mp(eta, t1 + s1 * h, t2 + s2 * h)
        gp += s1 * s2 * kp
        gm += s1 * s2 * km
    return gp / (4 * h * h), gm / (4 * h * h)


def _kernel_diag(params: Dict[str, Any]) -> OracleRecord:
    eps = float(params.get("eps", 0.3))
    omega = float(params.get("omega", 1.0))
    tau = float(params.get("tau", 1.1))
    gaps = [float(g) for g in params.get("gaps", (5e-4, 2e-3, 0.5))]
    value: Dict[str, List[float]] = {"gaps": gaps, "gplus": [], "gminus": [], "gsum": []}
    delta = 0.0
    with mp.workdps(KERNEL_DPS):
        eps_m, omega_m = mp.mpf(eps), mp.mpf(omega)

        def eta(s):
            return eps_m * mp.sin(omega_m * s)

        h = mp.mpf(KERNEL_STEP)
        for gap in gaps:
            # the same binary end points the float kernels see
            t1, t2 = mp.mpf(tau + 0.5 * gap), mp.mpf(tau - 0.5 * gap)
            gp, gm = _mixed_stencil(eta, t1, t2, h)
            gp2, gm2 = _mixed_stencil(eta, t1, t2, 2 * h)
            delta = max(delta, float(abs(gp2 - gp)), float(abs(gm2 - gm)))
            value["gplus"].append(float(gp))
            value["gminus"].append(float(gm))
            value["gsum"].append(float(gp + gm))
    if delta > STABILITY:
        raise ConvergenceError(f"oracle 'kernel_diag' unstable under step doubling: {delta:g}")
    return OracleRecord(
        "kernel_diag", {"eps": eps, "omega": omega, "tau": tau, "gaps": gaps}, value,
        f"∂₁∂₂K± for η = eps·sin(ωτ) at τ ± gap/2: central 4-point stencil on K±, "
        f"z± by tanh-sinh quadrature, {KERNEL_DPS} digits",
        2 * 4 * len(gaps), delta,
    )


def _step_coefficient(params: Dict[str, Any]) -> OracleRecord:
    bi = float(params.get("beta_i", 0.0))
    bf = float(params.get("beta_f", 0.5))
    a = float(params.get("a", 1.0))
    gi, gf = 1.0 / math.sqrt(1.0 - bi * bi), 1.0 / math.sqrt(1.0 - bf * bf)
    direct = a / (4.0 * math.pi) * math.fsum([gi * gf, -gi * gf * bi * bf, -1.0])
    value = step_coefficient(bi, bf, a)
    return OracleRecord(
        "step_coefficient", {"beta_i": bi, "beta_f": bf, "a": a}, value,
        "(a/4π)[γ_i γ_f (1 - β_i β_f) - 1], rapidity form checked against the γ form",
        0, abs(value - direct), source="closed_form",
    )


REGISTRY: Dict[str, Callable[[Dict[str, Any]], OracleRecord]] = {
    "gamma_integral": _gamma_integral,
    "log2d": _log2d,
    "mu0_uniform": _mu0_uniform,
    "kernel_diag": _kernel_diag,
    "step_coefficient": _step_coefficient,
}


def oracle_integral(name: str, params: Optional[Dict[str, Any]] = None) -> OracleRecord:
    """Recompute one record. Raises KeyError for unknown names, ConvergenceError if unstable."""
    if name not in REGISTRY:
        raise KeyError(f"unknown oracle {name!r}; known: {sorted(REGISTRY)}")
    record = REGISTRY[name](dict(params or {}))
    logger.info("oracle %s = %r (%s, %d nodes)", name, record.value, record.source, record.nodes)
    return record


def _path(name: str) -> str:
    return os.path.join(RECORDS_DIR, f"{name}.json")


def write_record(record: OracleRecord) -> str:
    os.makedirs(RECORDS_DIR, exist_ok=True)
    path = _path(record.name)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(asdict(record), f, indent=2, sort_keys=True, ensure_ascii=False)
        f.write("\n")
    return path


def load_record(name: str) -> OracleRecord:
    with open(_path(name), "r", encoding="utf-8") as f:
        data = json.load(f)
    return OracleRecord(**data)


def available_records() -> List[str]:
    if not os.path.isdir(RECORDS_DIR):
        return []
    return sorted(f[:-5] for f in os.listdir(RECORDS_DIR) if f.endswith(".json"))


def main(argv: Optional[List[str]] = None) -> int:
    parser = argparse.ArgumentParser(description="Recompute brute-force oracle records.")
    parser.add_argument("names", nargs="*", help=f"records to recompute ({', '.join(REGISTRY)})")
    parser.add_argument("--dry-run", action="store_true", help="print instead of writing")
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    if not args.names:
        stored = set(available_records())
        for name in sorted(REGISTRY):
            if name in stored:
                record = load_record(name)
                print(f"{name}: {record.value} ({record.source})")
            else:
                print(f"{name}: no stored record")
        return 0
    for name in args.names:
        try:
            record = oracle_integral(name)
        except (KeyError, ConvergenceError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
        if args.dry_run:
            print(json.dumps(asdict(record), indent=2, sort_keys=True, ensure_ascii=False))
        else:
            print(f"wrote {write_record(record)}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
