"""Declarative experiment configuration (TOML) with strict validation.

A configuration is one TOML file with nested blocks: a geometry block, a
deformation block, and a list of task blocks.  Unknown keys anywhere are
hard errors, so typos cannot silently change an experiment.  A top-level
``preset`` key starts from a built-in experiment and lets the file
override individual blocks.
"""
from __future__ import annotations

import hashlib
import json
import sys
from dataclasses import dataclass, field
from typing import Any

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .geometry import (ScalarField, TorusGeometry, ValidationError,
                       constant_scalar, make_torus, norm,
                       scalar_from_function)

DEFAULT_SEED = 20240901

#: Zero-average profiles of the distinguished circle angle, by name.
CIRCLE_PROFILES = {
    "cos": lambda theta: np.cos(theta),
    "sin": lambda theta: np.sin(theta),
    "cos2": lambda theta: np.cos(2 * theta),
    "sin2": lambda theta: np.sin(2 * theta),
}

TASK_TYPES = ("spectrum", "positivity", "zero_mode", "heat_trace",
              "index_check", "flux", "positivity_sweep")


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""


def _check_keys(block: dict, allowed: set[str], path: str) -> None:
    unknown = set(block) - allowed
    if unknown:
        raise ConfigError(f"{path}: unknown key(s) {sorted(unknown)}; "
                          f"allowed: {sorted(allowed)}")


def _require(block: dict, key: str, path: str) -> Any:
    if key not in block:
        raise ConfigError(f"{path}.{key}: required key missing")
    return block[key]


@dataclass(frozen=True)
class GeometryConfig:
    dim: int
    radii: tuple[float, ...]
    grid: tuple[int, ...]
    spin_structure: tuple[str, ...]

    def build(self) -> TorusGeometry:
        return make_torus(self.dim, self.radii, self.grid, self.spin_structure)

    def to_dict(self) -> dict:
        return {"dim": self.dim, "radii": list(self.radii),
                "grid": list(self.grid),
                "spin_structure": list(self.spin_structure)}


@dataclass(frozen=True)
class DeformationConfig:
    kind: str
    mu: float = 0.0
    tau: float = 0.0
    profile: str = ""
    samples: tuple[float, ...] = ()

    def to_dict(self) -> dict:
        payload = {"kind": self.kind, "mu": self.mu, "tau": self.tau}
        if self.profile:
            payload["profile"] = self.profile
        if self.samples:
            payload["samples"] = list(self.samples)
        return payload


@dataclass(frozen=True)
class TaskConfig:
    type: str
    params: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"type": self.type, **self.params}


@dataclass(frozen=True)
class ExperimentConfig:
    geometry: GeometryConfig
    deformation: DeformationConfig
    tasks: tuple[TaskConfig, ...]
    output_dir: str
    seed: int = DEFAULT_SEED
    name: str = ""

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "geometry": self.geometry.to_dict(),
            "deformation": self.deformation.to_dict(),
            "tasks": [t.to_dict() for t in self.tasks],
            "output_dir": self.output_dir,
            "seed": self.seed,
        }

    def config_hash(self) -> str:
        """Fingerprint of the computation (independent of where it is stored)."""
        payload = self.to_dict()
        payload.pop("output_dir")
        canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _parse_geometry(block: dict, path: str = "geometry") -> GeometryConfig:
    _check_keys(block, {"dim", "radii", "grid", "spin_structure"}, path)
    dim = int(_require(block, "dim", path))
    radii = tuple(float(a) for a in _require(block, "radii", path))
    grid = tuple(int(n) for n in _require(block, "grid", path))
    spin = tuple(str(s) for s in block.get("spin_structure",
                                           ["periodic"] * dim))
    cfg = GeometryConfig(dim, radii, grid, spin)
    try:
        cfg.build()
    except ValidationError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return cfg


def _parse_deformation(block: dict, path: str = "deformation") -> DeformationConfig:
    kind = str(_require(block, "kind", path))
    if kind == "constant":
        _check_keys(block, {"kind", "mu"}, path)
        return DeformationConfig(kind=kind, mu=float(_require(block, "mu", path)))
    if kind == "circle_profile":
        _check_keys(block, {"kind", "profile", "tau", "mu"}, path)
        profile = str(_require(block, "profile", path))
        if profile not in CIRCLE_PROFILES:
            raise ConfigError(f"{path}.profile: unknown profile {profile!r}; "
                              f"choose from {sorted(CIRCLE_PROFILES)}")
        return DeformationConfig(kind=kind, profile=profile,
                                 tau=float(_require(block, "tau", path)),
                                 mu=float(block.get("mu", 0.0)))
    if kind == "torus_sine":
        _check_keys(block, {"kind", "tau"}, path)
        return DeformationConfig(kind=kind,
                                 tau=float(_require(block, "tau", path)))
    if kind == "custom":
        _check_keys(block, {"kind", "samples"}, path)
        samples = tuple(float(v) for v in _require(block, "samples", path))
        return DeformationConfig(kind=kind, samples=samples)
    raise ConfigError(f"{path}.kind: unknown deformation kind {kind!r}")


_TASK_KEYS = {
    "spectrum": {"k", "tol", "solver", "compare_dense", "max_iter"},
    "positivity": {"k", "tol"},
    "zero_mode": set(),
    "heat_trace": {"t_grid", "accuracy", "k"},
    "index_check": {"t", "tol"},
    "flux": set(),
    "positivity_sweep": {"tau_values", "k", "tol"},
}


def _parse_task(block: dict, index: int) -> TaskConfig:
    path = f"tasks[{index}]"
    task_type = str(_require(block, "type", path))
    if task_type not in TASK_TYPES:
        raise ConfigError(f"{path}.type: unknown task {task_type!r}; "
                          f"choose from {sorted(TASK_TYPES)}")
    params = {k: v for k, v in block.items() if k != "type"}
    _check_keys(params, _TASK_KEYS[task_type], path)
    if task_type == "heat_trace":
        _require(block, "t_grid", path)
    if task_type == "positivity_sweep":
        _require(block, "tau_values", path)
    return TaskConfig(type=task_type, params=params)


def parse_config_dict(raw: dict, preset_lookup=None) -> ExperimentConfig:
    """Validate a raw mapping (from TOML or a preset) into a config."""
    allowed = {"preset", "name", "geometry", "deformation", "tasks",
               "output_dir", "seed"}
    _check_keys(raw, allowed, "top level")
    if "preset" in raw:
        if preset_lookup is None:
            from .presets import preset_config_dict
            preset_lookup = preset_config_dict
        base = preset_lookup(str(raw["preset"]))
        merged = dict(base)
        for key in ("name", "geometry", "deformation", "tasks",
                    "output_dir", "seed"):
            if key in raw:
                merged[key] = raw[key]
        raw = merged
    geometry = _parse_geometry(dict(_require(raw, "geometry", "top level")))
    deformation = _parse_deformation(dict(_require(raw, "deformation",
                                                   "top level")))
    task_blocks = _require(raw, "tasks", "top level")
    if not task_blocks:
        raise ConfigError("tasks: at least one task is required")
    tasks = tuple(_parse_task(dict(t), i) for i, t in enumerate(task_blocks))
    return ExperimentConfig(geometry=geometry, deformation=deformation,
                            tasks=tasks,
                            output_dir=str(raw.get("output_dir", "results")),
                            seed=int(raw.get("seed", DEFAULT_SEED)),
                            name=str(raw.get("name", "")))


def load_config(path) -> ExperimentConfig:
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: TOML parse error: {exc}") from exc
    except OSError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return parse_config_dict(raw)


# -- deformation field construction -------------------------------------------

def normalized_circle_profile(geom: TorusGeometry, profile: str) -> ScalarField:
    """Named profile of the last-circle angle with unit L2 norm over the torus."""
    fn = CIRCLE_PROFILES[profile]
    last = geom.dim - 1
    radius = geom.radii[last]

    def sample(*coords):
        return fn(coords[last] / radius)

    h_raw = scalar_from_function(geom, sample)
    return ScalarField(geom, h_raw.values / norm(h_raw))


def build_deformation_field(geom: TorusGeometry,
                            cfg: DeformationConfig) -> ScalarField:
    """Realize a deformation block as a real scalar field on the grid."""
    if cfg.kind == "constant":
        return constant_scalar(geom, cfg.mu)
    if cfg.kind == "circle_profile":
        h = normalized_circle_profile(geom, cfg.profile)
        return ScalarField(geom, cfg.mu + cfg.tau * h.values)
    if cfg.kind == "torus_sine":
        if geom.dim != 2:
            raise ConfigError("torus_sine requires a two-dimensional torus")
        if abs(geom.radii[0] - geom.radii[1]) > 1e-12 * geom.radii[0]:
            raise ConfigError("torus_sine requires equal circle radii")
        a = geom.radii[0]

        def sample(x, y):
            return -cfg.tau * a ** 2 * np.sin(x / a) * np.sin(y / a)

        return scalar_from_function(geom, sample)
    if cfg.kind == "custom":
        samples = np.asarray(cfg.samples, dtype=float)
        if samples.size != geom.npoints:
            raise ConfigError(
                f"custom samples: expected {geom.npoints} values, "
                f"got {samples.size}")
        return ScalarField(geom, samples.reshape(geom.grid))
    raise ConfigError(f"unknown deformation kind {cfg.kind!r}")
