# mirror_mass/config/presets.py

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Any, Dict

import yaml

from mirror_mass.utils.unit_parser import parse_proper_time

# parameters that are proper times and may carry the "/a" suffix
_TIME_KEYS = ("tau0", "width", "uniform_before")


@dataclass(frozen=True)
class TrajectoryPreset:
    id: str
    label: str
    family: str
    params: Dict[str, Any] = field(default_factory=dict)

    def resolved_params(self, a: float) -> Dict[str, Any]:
        out = dict(self.params)
        for key in _TIME_KEYS:
            if key in out:
                out[key] = parse_proper_time(out[key], a)
        return out

    def build(self, a: float):
        """Returns the Trajectory described by this preset for coupling a."""
        from mirror_mass.physics.trajectory import from_descriptor

        return from_descriptor({"family": self.family, **self.resolved_params(a)})


def load_presets() -> Dict[str, TrajectoryPreset]:
    yaml_path = os.path.join(os.path.dirname(__file__), "trajectories.yaml")
    with open(yaml_path, "r", encoding="utf-8") as f:
        config = yaml.safe_load(f)

    presets: Dict[str, TrajectoryPreset] = {}
    for p in config.get("trajectories", []):
        params = {k: v for k, v in p.items() if k not in ("id", "label", "family")}
        presets[p["id"]] = TrajectoryPreset(
            id=p["id"], label=p["label"], family=p["family"], params=params
        )
    return presets


TRAJECTORY_PRESETS = load_presets()
