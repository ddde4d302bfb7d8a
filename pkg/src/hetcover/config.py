"""Run configuration: validation and JSON (de)serialization.

The on-disk format is a single JSON object with explicit keys mirroring
RunConfig. Unknown keys anywhere in the document are rejected so that typos
fail fast instead of silently falling back to defaults.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .control import PROPORTIONAL_KINDS, ControlLaw
from .domain import ConvexPolygon, DensityField, load_sampled_density
from .errors import ValidationError
from .node_functions import (
    Metric2x2,
    NodeFunctionSpec,
    check_cutoff_equality,
    validate_decreasing,
)

_TOP_KEYS = {
    "polygon",
    "resolution",
    "density",
    "agents",
    "control",
    "dt",
    "max_steps",
    "termination_threshold",
    "seed",
    "output_dir",
}
_DENSITY_KEYS = {"kind", "level", "amplitude", "decay", "center", "path", "values"}
_AGENT_KEYS = {"position", "spec", "u_max", "u_const", "delta"}
_SPEC_KEYS = {"family", "alpha", "d_add", "R_power", "poly_coeffs", "metric", "range_limit", "shift"}
_METRIC_KEYS = {"L", "a", "b", "c", "theta"}
_CONTROL_KEYS = {"kind", "k_prop"}


def _check_keys(d: dict, allowed: set, where: str) -> None:
    if not isinstance(d, dict):
        raise ValidationError(f"{where} must be a JSON object, got {type(d).__name__}")
    unknown = sorted(set(d) - allowed)
    if unknown:
        raise ValidationError(f"unknown key(s) {unknown} in {where}; allowed: {sorted(allowed)}")


@dataclass(frozen=True)
class AgentConfig:
    """One agent: node-function spec, optional start position and speed limits."""

    spec: NodeFunctionSpec
    position: tuple[float, float] | None = None
    u_max: float | None = None
    u_const: float | None = None
    delta: float = 0.1

    def __post_init__(self):
        if self.position is not None:
            object.__setattr__(self, "position", (float(self.position[0]), float(self.position[1])))
        for name in ("u_max", "u_const"):
            v = getattr(self, name)
            if v is not None:
                if not (math.isfinite(float(v)) and float(v) > 0):
                    raise ValidationError(f"{name} must be positive when set, got {v}")
                object.__setattr__(self, name, float(v))
        object.__setattr__(self, "delta", float(self.delta))
        if not (math.isfinite(self.delta) and self.delta > 0):
            raise ValidationError(f"delta must be positive, got {self.delta}")


@dataclass(frozen=True)
class RunConfig:
    """Complete description of one simulation run."""

    polygon: ConvexPolygon
    density: DensityField
    agents: tuple[AgentConfig, ...]
    control: ControlLaw = field(default_factory=lambda: ControlLaw("proportional", 1.0))
    resolution: float = 50.0
    dt: float = 0.05
    max_steps: int = 2000
    termination_threshold: float = 0.5
    seed: int = 0
    output_dir: str = "out"

    def __post_init__(self):
        object.__setattr__(self, "agents", tuple(self.agents))
        if not self.agents:
            raise ValidationError("at least one agent is required")
        for name in ("resolution", "dt", "termination_threshold"):
            v = float(getattr(self, name))
            object.__setattr__(self, name, v)
            if not (math.isfinite(v) and v > 0):
                raise ValidationError(f"{name} must be positive, got {v}")
        object.__setattr__(self, "max_steps", int(self.max_steps))
        object.__setattr__(self, "seed", int(self.seed))
        object.__setattr__(self, "output_dir", str(self.output_dir))
        if self.max_steps < 0:
            raise ValidationError(f"max_steps must be >= 0, got {self.max_steps}")
        if self.control.kind in PROPORTIONAL_KINDS and self.control.k_prop * self.dt > 1.0 + 1e-12:
            raise ValidationError(
                f"k_prop * dt = {self.control.k_prop * self.dt:.6g} exceeds the stability bound 1"
            )
        if self.control.kind == "saturated":
            missing = [i for i, a in enumerate(self.agents) if a.u_max is None]
            if missing:
                raise ValidationError(f"saturated law requires u_max for agents {missing}")
        if self.control.kind == "constant_speed":
            missing = [i for i, a in enumerate(self.agents) if a.u_const is None]
            if missing:
                raise ValidationError(f"constant-speed law requires u_const for agents {missing}")
        if self.control.kind == "limited_range_proportional":
            check_cutoff_equality([a.spec for a in self.agents])
        explicit = [(i, a.position) for i, a in enumerate(self.agents) if a.position is not None]
        for i, p in explicit:
            if not self.polygon.contains_point(p, strict=True):
                raise ValidationError(f"agent {i} start {p} must lie strictly inside the domain")
        for k in range(len(explicit)):
            for m in range(k + 1, len(explicit)):
                if explicit[k][1] == explicit[m][1]:
                    raise ValidationError(
                        f"agents {explicit[k][0]} and {explicit[m][0]} share the start {explicit[k][1]}"
                    )
        for i, a in enumerate(self.agents):
            try:
                validate_decreasing(a.spec, self.polygon.diameter)
            except ValidationError as exc:
                raise ValidationError(f"agent {i}: {exc}") from None


def _metric_from_dict(d: dict, where: str) -> Metric2x2:
    _check_keys(d, _METRIC_KEYS, where)
    if "L" in d:
        if set(d) != {"L"}:
            raise ValidationError(f"{where}: give either L or (a, b, c, theta), not both")
        return Metric2x2(tuple(tuple(row) for row in d["L"]))
    needed = {"a", "b", "c", "theta"}
    if set(d) != needed:
        raise ValidationError(f"{where}: axes form needs exactly keys {sorted(needed)}, got {sorted(d)}")
    return Metric2x2.from_axes(d["a"], d["b"], d["c"], d["theta"])


def _spec_from_dict(d: dict, where: str) -> NodeFunctionSpec:
    _check_keys(d, _SPEC_KEYS, where)
    if "family" not in d:
        raise ValidationError(f"{where}: missing 'family'")
    metric = _metric_from_dict(d["metric"], f"{where}.metric") if d.get("metric") is not None else None
    poly = tuple(d["poly_coeffs"]) if d.get("poly_coeffs") is not None else None
    return NodeFunctionSpec(
        family=d["family"],
        alpha=d.get("alpha", 1.0),
        d_add=d.get("d_add", 0.0),
        R_power=d.get("R_power"),
        poly_coeffs=poly,
        metric=metric,
        range_limit=d.get("range_limit"),
        shift=d.get("shift", 0.0),
    )


def _density_from_dict(d: dict, base_dir: Path | None) -> DensityField:
    _check_keys(d, _DENSITY_KEYS, "density")
    kind = d.get("kind")
    if kind == "uniform":
        return DensityField.uniform(d.get("level", 1.0))
    if kind == "gaussian":
        for key in ("amplitude", "decay", "center"):
            if key not in d:
                raise ValidationError(f"gaussian density requires '{key}'")
        return DensityField.gaussian(d["amplitude"], d["decay"], d["center"])
    if kind == "sampled":
        if ("path" in d) == ("values" in d):
            raise ValidationError("sampled density needs exactly one of 'path' or 'values'")
        if "path" in d:
            path = Path(d["path"])
            if base_dir is not None and not path.is_absolute():
                path = base_dir / path
            return load_sampled_density(path)
        return DensityField.sampled(np.array(d["values"], dtype=float))
    raise ValidationError(f"unknown density kind {kind!r}")


def _agent_from_dict(d: dict, where: str) -> AgentConfig:
    _check_keys(d, _AGENT_KEYS, where)
    if "spec" not in d:
        raise ValidationError(f"{where}: missing 'spec'")
    pos = tuple(d["position"]) if d.get("position") is not None else None
    return AgentConfig(
        spec=_spec_from_dict(d["spec"], f"{where}.spec"),
        position=pos,
        u_max=d.get("u_max"),
        u_const=d.get("u_const"),
        delta=d.get("delta", 0.1),
    )


def config_from_dict(d: dict, base_dir=None) -> RunConfig:
    """Build a validated RunConfig from plain JSON-style data."""
    _check_keys(d, _TOP_KEYS, "config")
    for key in ("polygon", "density", "agents"):
        if key not in d:
            raise ValidationError(f"config is missing required key {key!r}")
    if not isinstance(d["agents"], list) or not d["agents"]:
        raise ValidationError("'agents' must be a non-empty list")
    control_d = d.get("control", {"kind": "proportional", "k_prop": 1.0})
    _check_keys(control_d, _CONTROL_KEYS, "control")
    if "kind" not in control_d:
        raise ValidationError("control is missing 'kind'")
    base = Path(base_dir) if base_dir is not None else None
    return RunConfig(
        polygon=ConvexPolygon(tuple(tuple(v) for v in d["polygon"])),
        density=_density_from_dict(d["density"], base),
        agents=tuple(_agent_from_dict(a, f"agents[{i}]") for i, a in enumerate(d["agents"])),
        control=ControlLaw(control_d["kind"], control_d.get("k_prop", 1.0)),
        resolution=d.get("resolution", 50.0),
        dt=d.get("dt", 0.05),
        max_steps=d.get("max_steps", 2000),
        termination_threshold=d.get("termination_threshold", 0.5),
        seed=d.get("seed", 0),
        output_dir=d.get("output_dir", "out"),
    )


def _metric_to_dict(m: Metric2x2) -> dict:
    return {"L": [list(row) for row in m.L]}


def _spec_to_dict(s: NodeFunctionSpec) -> dict:
    return {
        "family": s.family,
        "alpha": s.alpha,
        "d_add": s.d_add,
        "R_power": s.R_power,
        "poly_coeffs": list(s.poly_coeffs) if s.poly_coeffs is not None else None,
        "metric": _metric_to_dict(s.metric) if s.metric is not None else None,
        "range_limit": s.range_limit,
        "shift": s.shift,
    }


def _density_to_dict(f: DensityField) -> dict:
    if f.kind == "uniform":
        return {"kind": "uniform", "level": f.level}
    if f.kind == "gaussian":
        return {"kind": "gaussian", "amplitude": f.amplitude, "decay": f.decay, "center": list(f.center)}
    if f.source_path is not None:
        return {"kind": "sampled", "path": f.source_path}
    return {"kind": "sampled", "values": f.values.tolist()}


def config_to_dict(cfg: RunConfig) -> dict:
    """Plain-data echo of a RunConfig; config_from_dict inverts it exactly."""
    return {
        "polygon": [list(v) for v in cfg.polygon.vertices],
        "resolution": cfg.resolution,
        "density": _density_to_dict(cfg.density),
        "agents": [
            {
                "position": list(a.position) if a.position is not None else None,
                "spec": _spec_to_dict(a.spec),
                "u_max": a.u_max,
                "u_const": a.u_const,
                "delta": a.delta,
            }
            for a in cfg.agents
        ],
        "control": {"kind": cfg.control.kind, "k_prop": cfg.control.k_prop},
        "dt": cfg.dt,
        "max_steps": cfg.max_steps,
        "termination_threshold": cfg.termination_threshold,
        "seed": cfg.seed,
        "output_dir": cfg.output_dir,
    }


def dumps_config(cfg: RunConfig) -> str:
    return json.dumps(config_to_dict(cfg), indent=2, sort_keys=True)


def load_config(path) -> RunConfig:
    """Parse and validate a JSON run-configuration file."""
    p = Path(path)
    try:
        raw = p.read_text()
    except OSError as exc:
        raise ValidationError(f"{p}: cannot read config ({exc})") from exc
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{p}: invalid JSON ({exc})") from None
    return config_from_dict(data, base_dir=p.parent)


def save_config(cfg: RunConfig, path) -> None:
    Path(path).write_text(dumps_config(cfg) + "\n")
