"""Benchmark configuration: per-problem defaults merged with a TOML document."""

from __future__ import annotations

import copy
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from ..errors import ConfigError

PROBLEMS = ("griffith", "edge_tension", "edge_shear", "ortho_center", "ortho_edge")
SIF_METHODS = ("displacement", "stress")

# builder keyword arguments accepted per problem
_GEOMETRY_KEYS = {
    "griffith": {"width", "height", "a"},
    "edge_tension": {"width", "height", "a"},
    "edge_shear": {"width", "height", "a"},
    "ortho_center": {"width", "height", "a"},
    "ortho_edge": {"w", "a"},
}
_MATERIAL_KEYS = {
    "griffith": {"E", "nu"},
    "edge_tension": {"E", "nu"},
    "edge_shear": {"E", "nu"},
    "ortho_center": {"G12", "nu12", "phi", "angle"},
    "ortho_edge": {"E1", "E2", "G12", "nu12", "angle"},
}
_SWEEP_KEYS = {"ortho_center": {"phi"}, "ortho_edge": {"angle"}}

DEFAULTS = {
    "griffith": dict(
        meshes=[[10, 10], [20, 20], [40, 40]], layers=[2], layer_scaling="proportional",
        geometry={"width": 10.0, "height": 10.0, "a": 100.0}, load=1e4,
        material={"E": 1e7, "nu": 0.3}, plane_state="plane_strain", conditioning=True),
    "edge_tension": dict(
        meshes=[[20, 40], [40, 80], [60, 120], [80, 160]], layers=[5],
        geometry={"width": 1.0, "height": 2.0, "a": 0.5}, load=1.0,
        material={"E": 1.0, "nu": 0.3}, plane_state="plane_strain"),
    "edge_shear": dict(
        meshes=[[20, 40], [30, 60], [40, 80], [50, 100], [60, 120]], layers=[5],
        geometry={"width": 7.0, "height": 16.0, "a": 3.5}, load=1.0,
        material={"E": 3e7, "nu": 0.25}, plane_state="plane_strain"),
    "ortho_center": dict(
        meshes=[[40, 40]], layers=[5], sif_methods=["stress"],
        geometry={"width": 1.0, "height": 1.0, "a": 0.2}, load=1.0,
        material={"G12": 6e9, "nu12": 0.03}, plane_state="plane_stress",
        sweep={"phi": [0.2, 0.5, 1.0, 2.0, 5.0]}),
    "ortho_edge": dict(
        meshes=[[60, 120]], layers=[5], sif_methods=["stress"],
        geometry={"w": 1.0, "a": 0.5}, load=1.0,
        material={"E1": 144.8e9, "E2": 11.7e9, "G12": 9.66e9, "nu12": 0.21},
        plane_state="plane_stress", sweep={"angle": [0.0, 15.0, 30.0, 45.0, 60.0, 75.0, 90.0]}),
}


@dataclass
class BenchmarkConfig:
    problem: str
    meshes: list
    layers: list
    layer_scaling: str = "fixed"
    sif_methods: list = field(default_factory=lambda: list(SIF_METHODS))
    geometry: dict = field(default_factory=dict)
    load: float = 1.0
    material: dict = field(default_factory=dict)
    plane_state: str = "plane_strain"
    sweep: dict = field(default_factory=dict)
    conditioning: bool = False
    output: str = "results/benchmark"
    emit_modes: bool = False

    def validate(self) -> "BenchmarkConfig":
        if self.problem not in PROBLEMS:
            raise ConfigError(f"unknown problem {self.problem!r}; choose from {PROBLEMS}")
        if not self.meshes:
            raise ConfigError("mesh sweep is empty")
        for m in self.meshes:
            if len(m) != 2 or any(int(v) != v or v < 1 for v in m):
                raise ConfigError(f"mesh entries must be [nx, ny] positive integers, got {m}")
        if not self.layers:
            raise ConfigError("n_layers sweep is empty")
        if any(int(v) != v or v < 1 for v in self.layers):
            raise ConfigError(f"n_layers must be positive integers, got {self.layers}")
        if self.layer_scaling not in ("fixed", "proportional"):
            raise ConfigError("layer_scaling must be 'fixed' or 'proportional'")
        if not self.sif_methods or any(m not in SIF_METHODS for m in self.sif_methods):
            raise ConfigError(f"sif_methods must be a non-empty subset of {SIF_METHODS}")
        if self.plane_state not in ("plane_strain", "plane_stress"):
            raise ConfigError(f"unknown plane state {self.plane_state!r}")
        bad = set(self.geometry) - _GEOMETRY_KEYS[self.problem]
        if bad:
            raise ConfigError(f"unknown geometry keys for {self.problem}: {sorted(bad)}")
        bad = set(self.material) - _MATERIAL_KEYS[self.problem]
        if bad:
            raise ConfigError(f"unknown material keys for {self.problem}: {sorted(bad)}")
        allowed = _SWEEP_KEYS.get(self.problem, set())
        if set(self.sweep) - allowed or len(self.sweep) > 1:
            raise ConfigError(f"{self.problem} accepts at most one sweep over {sorted(allowed)}")
        for k, v in self.sweep.items():
            if not v:
                raise ConfigError(f"sweep {k!r} is empty")
        if self.problem == "edge_tension":
            ratio = self.geometry["a"] / self.geometry["width"]
            if ratio > 0.6:
                raise ConfigError(f"a/W = {ratio:g} exceeds 0.6, the validity limit of the "
                                  "reference geometry factor")
        return self

    def layer_values(self, mesh_index: int, setting: int) -> int:
        if self.layer_scaling == "fixed":
            return int(setting)
        base = self.meshes[0][0]
        return max(1, int(round(setting * self.meshes[mesh_index][0] / base)))

    def to_dict(self) -> dict:
        return asdict(self)


def default_config(problem: str) -> BenchmarkConfig:
    if problem not in DEFAULTS:
        raise ConfigError(f"unknown problem {problem!r}; choose from {PROBLEMS}")
    d = copy.deepcopy(DEFAULTS[problem])
    return BenchmarkConfig(problem=problem, output=f"results/{problem}", **d).validate()


def _merge(base: BenchmarkConfig, doc: dict) -> BenchmarkConfig:
    known = set(BenchmarkConfig.__dataclass_fields__)
    bad = set(doc) - known
    if bad:
        raise ConfigError(f"unknown configuration keys: {sorted(bad)}")
    data = base.to_dict()
    for key, value in doc.items():
        if key in ("geometry", "material") and isinstance(value, dict):
            data[key].update(value)
        else:
            data[key] = value
    return BenchmarkConfig(**data).validate()


def config_from_dict(doc: dict, problem: Optional[str] = None) -> BenchmarkConfig:
    doc = dict(doc)
    name = problem or doc.pop("problem", None)
    doc.pop("problem", None)
    if name is None:
        raise ConfigError("configuration does not name a problem")
    return _merge(default_config(name), doc)


def load_config(path, problem: Optional[str] = None) -> BenchmarkConfig:
    try:
        with open(Path(path), "rb") as fh:
            doc = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read configuration {path}: {exc}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML in {path}: {exc}") from None
    return config_from_dict(doc, problem)
