# interface/run_state.py

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Any, Dict, Optional

import yaml

from mirror_mass.config.settings import SETTINGS
from mirror_mass.utils.config_codec import decode_config, encode_config
from mirror_mass.utils.unit_parser import parse_proper_time

# keys whose values are proper times and may be written as "20/a"
_TIME_KEYS = ("tau_start", "tau_end", "dtau", "tau0", "width")

DEFAULTS: Dict[str, Any] = {
    "traj": None,
    "family": "uniform",
    "preset": None,
    "beta": 0.0,
    "alpha0": 0.3,
    "tau0": 0.0,
    "beta_i": 0.0,
    "beta_f": 0.5,
    "width": 0.0,
    "a": 1.0,
    "tau_start": 0.0,
    "tau_end": 10.0,
    "dtau": 0.5,
    "rel_tol": None,
    "abs_tol": None,
    "window": None,
    "format": SETTINGS.run.format,
    "out": None,
    "threads": SETTINGS.run.threads,
    "seed": 0,
    "method": "accumulate",
    "mass": SETTINGS.dynamics.bare_mass,
    "kick": 0.0,
    "samples": 100,
    "quick": False,
}


def safe_cast(val: Any, to_type, default: Any) -> Any:
    if val is None:
        return default
    try:
        return to_type(val)
    except (ValueError, TypeError):
        return default


def read_config_file(path: str) -> Dict[str, Any]:
    """
    Read `key = value` lines; '#' starts a comment. Values are YAML scalars,
    so numbers, booleans and quoted strings come back typed. Dashes in keys
    are read as underscores ("tau-start" = "tau_start").
    """
    params: Dict[str, Any] = {}
    with open(path, "r", encoding="utf-8") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (part.strip() for part in line.split("=", 1))
            key = key.replace("-", "_")
            if key not in DEFAULTS:
                raise ValueError(f"{path}:{lineno}: unknown setting '{key}'")
            params[key] = yaml.safe_load(value) if value else None
    return params


def load_run_params(
    *,
    code: Optional[str] = None,
    config_path: Optional[str] = None,
    overrides: Optional[Dict[str, Any]] = None,
) -> Dict[str, Any]:
    """
    Merge defaults < run code < config file < command-line overrides.
    None never overrides. Raises ValueError on a corrupted run code.
    """
    params: Dict[str, Any] = dict(DEFAULTS)
    layers = []
    if code:
        layers.append(decode_config(code))
    if config_path:
        layers.append(read_config_file(config_path))
    if overrides:
        layers.append(overrides)
    for layer in layers:
        params.update({k: v for k, v in layer.items() if k in DEFAULTS and v is not None})
    return params


@dataclass(frozen=True)
class RunConfig:
    command: str
    traj: Optional[str]
    family: str
    preset: Optional[str]
    beta: float
    alpha0: float
    tau0: float
    beta_i: float
    beta_f: float
    width: float
    a: float
    tau_start: float
    tau_end: float
    dtau: float
    rel_tol: Optional[float]
    abs_tol: Optional[float]
    window: Optional[float]
    format: str
    out: Optional[str]
    threads: int
    seed: int
    method: str
    mass: float
    kick: float
    samples: int
    quick: bool

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError("a must be > 0")
        if not self.tau_start < self.tau_end:
            raise ValueError("tau_start must be < tau_end")
        if not self.dtau > 0:
            raise ValueError("dtau must be > 0")
        if self.format not in ("csv", "json"):
            raise ValueError("format must be csv or json")
        if self.threads < 0:
            raise ValueError("threads must be >= 0")
        if self.samples < 0:
            raise ValueError("samples must be >= 0")

    @classmethod
    def from_params(cls, command: str, params: Dict[str, Any]) -> "RunConfig":
        a = safe_cast(params.get("a"), float, math.nan)
        values = dict(params)
        for key in _TIME_KEYS:
            values[key] = parse_proper_time(values[key], a if a > 0 else None)
        return cls(
            command=command,
            traj=values["traj"],
            family=str(values["family"]),
            preset=values["preset"],
            beta=float(values["beta"]),
            alpha0=float(values["alpha0"]),
            tau0=values["tau0"],
            beta_i=float(values["beta_i"]),
            beta_f=float(values["beta_f"]),
            width=values["width"],
            a=a,
            tau_start=values["tau_start"],
            tau_end=values["tau_end"],
            dtau=values["dtau"],
            rel_tol=safe_cast(values["rel_tol"], float, None),
            abs_tol=safe_cast(values["abs_tol"], float, None),
            window=safe_cast(values["window"], float, None),
            format=str(values["format"]),
            out=values["out"],
            threads=int(values["threads"]),
            seed=int(values["seed"]),
            method=str(values["method"]),
            mass=float(values["mass"]),
            kick=float(values["kick"]),
            samples=int(values["samples"]),
            quick=bool(values["quick"]),
        )

    def run_code(self) -> str:
        """Compact code that reproduces this run with --from-code (output path excluded)."""
        params = {k: v for k, v in asdict(self).items() if k not in ("command", "out")}
        return encode_config(params)
