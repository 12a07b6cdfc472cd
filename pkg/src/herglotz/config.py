"""Scenario documents: one JSON object per run, validated fail-closed."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Optional, Tuple

import numpy as np

from .continuous import FlowConfig
from .core import DiscreteLagrangian, DiscreteState, MechanicalLagrangian, make_potential
from .discretize import ShootingConfig, exact_discrete, free_particle_exact, midpoint_discrete
from .errors import ConfigError
from .newton import NewtonConfig

SYSTEM_KINDS = ("free", "harmonic", "polynomial")
DISCRETIZATION_KINDS = ("midpoint", "exact_shooting", "free_particle_exact")
FIELDS = ("t", "q", "z", "p", "H", "logH", "sigma_d")

_SECTIONS = {
    "system": {"kind", "dim", "gamma", "k", "coeffs"},
    "discretization": {"kind", "h"},
    "run": {"steps", "q0", "q1", "z0"},
    "solver": {"abs_tol", "rel_tol", "max_iters", "substeps_per_unit_time"},
    "output": {"path", "fields"},
}
_REQUIRED = ("system", "discretization", "run")


@dataclass(frozen=True)
class ScenarioConfig:
    kind: str
    dim: int
    gamma: float
    potential_params: dict
    discretization: str
    h: float
    steps: int
    q0: Tuple[float, ...]
    q1: Tuple[float, ...]
    z0: float
    newton: NewtonConfig = NewtonConfig()
    flow: FlowConfig = FlowConfig()
    output_path: Optional[str] = None
    fields: Tuple[str, ...] = FIELDS
    source: Optional[str] = field(default=None, compare=False)

    def model(self) -> MechanicalLagrangian:
        return MechanicalLagrangian(self.dim, self.gamma, make_potential(self.kind, **self.potential_params))

    def discrete_lagrangian(self, h: Optional[float] = None) -> DiscreteLagrangian:
        h = self.h if h is None else h
        if self.discretization == "midpoint":
            return midpoint_discrete(self.model(), h)
        if self.discretization == "free_particle_exact":
            return free_particle_exact(self.gamma, h, self.dim)
        return exact_discrete(self.model(), h, self.shooting())

    def shooting(self) -> ShootingConfig:
        base = ShootingConfig()
        tight = replace(self.newton, abs_tol=min(self.newton.abs_tol, base.newton.abs_tol),
                        rel_tol=min(self.newton.rel_tol, base.newton.rel_tol))
        return replace(base, newton=tight, flow_cfg=self.flow)

    def initial_state(self) -> DiscreteState:
        return DiscreteState(np.array(self.q0), np.array(self.q1), self.z0)

    def with_h(self, h: float) -> "ScenarioConfig":
        return replace(self, h=float(h))


def _number(value, where, *, positive=False, integer=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where} must be a number, got {value!r}")
    if integer and (not float(value).is_integer()):
        raise ConfigError(f"{where} must be an integer, got {value!r}")
    if not math.isfinite(value):
        raise ConfigError(f"{where} must be finite")
    if positive and value <= 0:
        raise ConfigError(f"{where} must be positive, got {value!r}")
    return int(value) if integer else float(value)


def _vector(value, dim, where):
    if not isinstance(value, list):
        value = [value]
    if len(value) != dim:
        raise ConfigError(f"{where} has {len(value)} components, system dim is {dim}")
    return tuple(_number(v, f"{where}[{i}]") for i, v in enumerate(value))


def _section(doc, name):
    sec = doc.get(name, {})
    if not isinstance(sec, dict):
        raise ConfigError(f"section {name!r} must be an object")
    unknown = set(sec) - _SECTIONS[name]
    if unknown:
        raise ConfigError(f"unknown key(s) in {name}: {', '.join(sorted(unknown))}")
    return sec


def parse_config(doc, source: Optional[str] = None) -> ScenarioConfig:
    """Validate a decoded JSON document; raises ``ConfigError`` on any problem."""
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(doc) - set(_SECTIONS)
    if unknown:
        raise ConfigError(f"unknown section(s): {', '.join(sorted(unknown))}")
    for name in _REQUIRED:
        if name not in doc:
            raise ConfigError(f"missing section {name!r}")

    system = _section(doc, "system")
    kind = system.get("kind")
    if kind not in SYSTEM_KINDS:
        raise ConfigError(f"system.kind must be one of {SYSTEM_KINDS}, got {kind!r}")
    dim = _number(system.get("dim", 1), "system.dim", positive=True, integer=True)
    if "gamma" not in system:
        raise ConfigError("system.gamma is required")
    gamma = _number(system["gamma"], "system.gamma")
    params = {}
    if kind == "harmonic":
        params["k"] = _number(system.get("k", 1.0), "system.k")
    elif "k" in system:
        raise ConfigError("system.k only applies to kind 'harmonic'")
    if kind == "polynomial":
        coeffs = system.get("coeffs")
        if not isinstance(coeffs, list) or not coeffs:
            raise ConfigError("system.coeffs must be a non-empty list")
        params["coeffs"] = [_number(c, f"system.coeffs[{i}]") for i, c in enumerate(coeffs)]
    elif "coeffs" in system:
        raise ConfigError("system.coeffs only applies to kind 'polynomial'")

    disc = _section(doc, "discretization")
    dkind = disc.get("kind", "midpoint")
    if dkind not in DISCRETIZATION_KINDS:
        raise ConfigError(f"discretization.kind must be one of {DISCRETIZATION_KINDS}, got {dkind!r}")
    if "h" not in disc:
        raise ConfigError("discretization.h is required")
    h = _number(disc["h"], "discretization.h", positive=True)
    if dkind == "free_particle_exact":
        if kind != "free":
            raise ConfigError("free_particle_exact requires system.kind 'free'")
        if gamma == 0:
            raise ConfigError("free_particle_exact is singular at gamma = 0; use midpoint or exact_shooting")

    run = _section(doc, "run")
    for key in ("steps", "q0", "q1"):
        if key not in run:
            raise ConfigError(f"run.{key} is required")
    steps = _number(run["steps"], "run.steps", positive=True, integer=True)
    q0 = _vector(run["q0"], dim, "run.q0")
    q1 = _vector(run["q1"], dim, "run.q1")
    z0 = _number(run.get("z0", 0.0), "run.z0")

    solver = _section(doc, "solver")
    try:
        newton = NewtonConfig(
            abs_tol=_number(solver.get("abs_tol", NewtonConfig.abs_tol), "solver.abs_tol", positive=True),
            rel_tol=_number(solver.get("rel_tol", NewtonConfig.rel_tol), "solver.rel_tol", positive=True),
            max_iters=_number(solver.get("max_iters", NewtonConfig.max_iters), "solver.max_iters",
                              positive=True, integer=True),
        )
        flow = FlowConfig(_number(solver.get("substeps_per_unit_time", FlowConfig.substeps_per_unit_time),
                                  "solver.substeps_per_unit_time", positive=True, integer=True))
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc

    output = _section(doc, "output")
    path = output.get("path")
    if path is not None and not isinstance(path, str):
        raise ConfigError("output.path must be a string or null")
    fields = output.get("fields", list(FIELDS))
    if not isinstance(fields, list) or not fields or any(f not in FIELDS for f in fields):
        raise ConfigError(f"output.fields must be a non-empty list drawn from {FIELDS}")
    fields = tuple(f for f in FIELDS if f in fields)

    return ScenarioConfig(kind, dim, gamma, params, dkind, h, steps, q0, q1, z0, newton, flow,
                          path, fields, source)


def load_config(path) -> ScenarioConfig:
    """Read and validate a scenario file. ``bundled:NAME`` refers to a packaged scenario."""
    path = str(path)
    try:
        if path.startswith("bundled:"):
            text = resources.files("herglotz").joinpath("data", path[len("bundled:"):] + ".json").read_text()
        else:
            text = Path(path).read_text(encoding="utf-8")
    except (OSError, FileNotFoundError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    return parse_config(doc, source=path)


def bundled_names() -> list:
    return sorted(p.name[:-5] for p in resources.files("herglotz").joinpath("data").iterdir()
                  if p.name.endswith(".json"))
