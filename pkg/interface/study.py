# interface/study.py

from __future__ import annotations

import json
import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from mirror_mass.errors import MirrorMassError
from mirror_mass.physics.massshift import mu_series
from mirror_mass.physics.quadrature import QuadratureSpec
from mirror_mass.physics.trajectory import compile_profile

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class StudyConfig:
    """
    samples: number of random profiles.
    max_omega: band limit in units of a (slow regime for <= 0.05).
    max_rapidity: bound on the summed sine amplitudes.
    """

    a: float = 1.0
    samples: int = 100
    seed: int = 0
    modes: int = 3
    max_omega: float = 0.05
    max_rapidity: float = 0.05
    duration: float = 200.0
    points: int = 41
    threads: int = 0

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError("a must be > 0")
        if self.samples < 0:
            raise ValueError("samples must be >= 0")
        if self.modes < 1:
            raise ValueError("modes must be >= 1")
        if not self.max_omega > 0 or not self.max_rapidity > 0:
            raise ValueError("max_omega and max_rapidity must be > 0")
        if self.points < 2:
            raise ValueError("points must be >= 2")


@dataclass(frozen=True)
class StudySample:
    index: int
    source: str
    min_mu: Optional[float]
    tau_at_min: Optional[float]
    converged: bool
    skipped: bool = False


@dataclass
class StudyReport:
    config: Dict[str, Any]
    samples: List[StudySample] = field(default_factory=list)

    @property
    def skipped(self) -> int:
        return sum(s.skipped for s in self.samples)

    @property
    def most_negative(self) -> Optional[StudySample]:
        done = [s for s in self.samples if not s.skipped]
        if not done:
            return None
        return min(done, key=lambda s: (s.min_mu, s.index))

    def to_json(self) -> str:
        best = self.most_negative
        payload = {
            "config": self.config,
            "evaluated": len(self.samples) - self.skipped,
            "skipped": self.skipped,
            "most_negative": None if best is None else asdict(best),
            "samples": [asdict(s) for s in self.samples],
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def random_profile_source(rng: np.random.Generator, config: StudyConfig) -> str:
    """
    η(τ) = (1 - e^{-(τ/T)²})²·Σ A_k sin(ω_k τ + φ_k), T = 5/a: at rest at τ = 0,
    band-limited to ω ≤ max_omega·a, Σ|A_k| ≤ max_rapidity.
    """
    a = config.a
    weights = rng.dirichlet(np.ones(config.modes))
    amplitudes = config.max_rapidity * rng.uniform(0.2, 1.0) * weights
    omegas = rng.uniform(0.1, 1.0, config.modes) * config.max_omega * a
    phases = rng.uniform(0.0, 2.0 * math.pi, config.modes)
    ramp = 5.0 / a
    terms = " + ".join(
        f"{float(A)!r}*sin({float(w)!r}*tau + {float(p)!r})"
        for A, w, p in zip(amplitudes, omegas, phases)
    )
    return f"eta = (1 - exp(-(tau/{ramp!r})^2))^2*({terms})"


def run_study(config: StudyConfig, spec: Optional[QuadratureSpec] = None) -> StudyReport:
    """
    Search random smooth profiles for the most negative μ(τ). Failed samples
    are skipped and counted; the report is a pure function of the config.
    """
    spec = spec or QuadratureSpec()
    rng = np.random.default_rng(config.seed)
    report = StudyReport(config=asdict(config))
    grid = np.linspace(0.0, config.duration / config.a, config.points)
    for index in range(config.samples):
        source = random_profile_source(rng, config)
        try:
            traj = compile_profile(source, uniform_before=0.0, scale=1.0 / config.a)
            series = mu_series(traj, config.a, grid, spec, threads=config.threads)
        except MirrorMassError as exc:
            logger.warning("study sample %d skipped: %s", index, exc)
            report.samples.append(StudySample(index, source, None, None, False, skipped=True))
            continue
        mu = series.mu
        k = int(np.argmin(mu))
        if not series.converged:
            logger.warning("study sample %d skipped: quadrature did not converge", index)
        report.samples.append(
            StudySample(
                index, source, float(mu[k]), float(grid[k]), series.converged,
                skipped=not series.converged,
            )
        )
        logger.info("study sample %d: min mu %.3e at tau=%g", index, mu[k], grid[k])
    return report
