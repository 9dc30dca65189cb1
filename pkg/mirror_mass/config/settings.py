# mirror_mass/config/settings.py

from __future__ import annotations

import os
from dataclasses import dataclass

import yaml


@dataclass(frozen=True)
class QuadratureDefaults:
    rel_tol: float
    abs_tol: float
    window_lambda: float
    max_subdivisions: int
    segment_panels: int
    segment_nodes: int


@dataclass(frozen=True)
class SeriesDefaults:
    accumulation_tol: float
    max_depth: int


@dataclass(frozen=True)
class DynamicsDefaults:
    bare_mass: float
    step_fraction: float


@dataclass(frozen=True)
class RunDefaults:
    version: str
    threads: int
    format: str


@dataclass(frozen=True)
class Settings:
    quadrature: QuadratureDefaults
    series: SeriesDefaults
    dynamics: DynamicsDefaults
    run: RunDefaults


def load_settings(yaml_path: str = "") -> Settings:
    """
    Load package defaults from defaults.yaml (or another file with the same layout).
    """
    yaml_path = yaml_path or os.path.join(os.path.dirname(__file__), "defaults.yaml")
    with open(yaml_path, "r", encoding="utf-8") as f:
        config = yaml.safe_load(f)

    q = config["quadrature"]
    s = config["series"]
    d = config["dynamics"]
    r = config["run"]
    return Settings(
        quadrature=QuadratureDefaults(
            rel_tol=float(q["rel_tol"]),
            abs_tol=float(q["abs_tol"]),
            window_lambda=float(q["window_lambda"]),
            max_subdivisions=int(q["max_subdivisions"]),
            segment_panels=int(q["segment_panels"]),
            segment_nodes=int(q["segment_nodes"]),
        ),
        series=SeriesDefaults(
            accumulation_tol=float(s["accumulation_tol"]),
            max_depth=int(s["max_depth"]),
        ),
        dynamics=DynamicsDefaults(
            bare_mass=float(d["bare_mass"]),
            step_fraction=float(d["step_fraction"]),
        ),
        run=RunDefaults(
            version=str(r["version"]),
            threads=int(r.get("threads", 0)),
            format=str(r.get("format", "csv")),
        ),
    )


SETTINGS = load_settings()
