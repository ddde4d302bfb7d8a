"""Control laws over first-order integrator dynamics with explicit Euler steps.

All four laws steer each agent toward the centroid of its (possibly
range-restricted) cell; agents whose cells are empty treat their own position
as the centroid and therefore hold still.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .domain import ConvexPolygon
from .errors import ValidationError

LAW_KINDS = ("proportional", "saturated", "constant_speed", "limited_range_proportional")

# Laws whose update is proportional below any cap; these need k_prop * dt <= 1.
PROPORTIONAL_KINDS = ("proportional", "saturated", "limited_range_proportional")


@dataclass(frozen=True)
class ControlLaw:
    kind: str
    k_prop: float = 1.0

    def __post_init__(self):
        if self.kind not in LAW_KINDS:
            raise ValidationError(f"unknown control law {self.kind!r}; expected one of {LAW_KINDS}")
        object.__setattr__(self, "k_prop", float(self.k_prop))
        if not (math.isfinite(self.k_prop) and self.k_prop > 0.0):
            raise ValidationError(f"k_prop must be finite and positive, got {self.k_prop}")


@dataclass(frozen=True)
class AgentState:
    """Agent position plus per-agent speed-constraint parameters."""

    position: tuple[float, float]
    spec_index: int = 0
    u_max: float | None = None
    u_const: float | None = None
    delta: float = 0.1

    def __post_init__(self):
        object.__setattr__(self, "position", (float(self.position[0]), float(self.position[1])))
        for name in ("u_max", "u_const"):
            v = getattr(self, name)
            if v is not None:
                object.__setattr__(self, name, float(v))
                if not (math.isfinite(float(v)) and float(v) > 0.0):
                    raise ValidationError(f"{name} must be positive when set, got {v}")
        if not (math.isfinite(self.delta) and self.delta > 0.0):
            raise ValidationError(f"delta must be positive, got {self.delta}")


def control_proportional(p, centroid, k_prop: float) -> np.ndarray:
    """Velocity -k_prop * (p - centroid); zero once the agent sits at the centroid."""
    p = np.asarray(p, dtype=float)
    c = np.asarray(centroid, dtype=float)
    return -k_prop * (p - c)


def control_saturated(p, centroid, k_prop: float, u_max: float) -> np.ndarray:
    """Proportional law with speed capped at u_max, direction preserved."""
    u = control_proportional(p, centroid, k_prop)
    speed = float(np.hypot(u[0], u[1]))
    if speed <= u_max:
        return u
    u = u * (u_max / speed)
    # unit-vector rounding can leave the norm an ulp above the cap
    while float(np.hypot(u[0], u[1])) > u_max:
        u = np.nextafter(u, 0.0)
    return u


def control_constant_speed(p, centroid, u_const: float, delta: float) -> np.ndarray:
    """Constant speed u_const toward the centroid, tapering linearly inside delta."""
    if not delta > 0:
        raise ValidationError(f"delta must be positive, got {delta}")
    d = np.asarray(p, dtype=float) - np.asarray(centroid, dtype=float)
    dist = float(np.hypot(d[0], d[1]))
    if dist >= delta:
        return -u_const * d / dist
    return -u_const * d / delta


def control_limited_range(p, centroid, k_prop: float) -> np.ndarray:
    """Proportional law toward the centroid of the range-restricted cell."""
    return control_proportional(p, centroid, k_prop)


def compute_controls(law: ControlLaw, states, moments) -> np.ndarray:
    """Per-agent velocities under `law` given current cell moments."""
    if len(states) != len(moments):
        raise ValidationError(f"{len(states)} states but {len(moments)} cell moments")
    out = np.zeros((len(states), 2))
    for i, (st, mom) in enumerate(zip(states, moments)):
        c = mom.centroid
        if law.kind == "proportional":
            out[i] = control_proportional(st.position, c, law.k_prop)
        elif law.kind == "saturated":
            if st.u_max is None:
                raise ValidationError(f"agent {i} needs u_max for the saturated law")
            out[i] = control_saturated(st.position, c, law.k_prop, st.u_max)
        elif law.kind == "constant_speed":
            if st.u_const is None:
                raise ValidationError(f"agent {i} needs u_const for the constant-speed law")
            out[i] = control_constant_speed(st.position, c, st.u_const, st.delta)
        else:
            out[i] = control_limited_range(st.position, c, law.k_prop)
    return out


def step(states, velocities, dt: float, polygon: ConvexPolygon, k_prop: float | None = None):
    """Explicit Euler update of all agents, clipped to the domain.

    Returns (new_states, clip_count). Clipping is a safety net only; the
    centroid always lies inside the domain, so a nonzero count signals a
    discretization problem. Pass k_prop for proportional-type laws to enforce
    the no-overshoot bound k_prop * dt <= 1.
    """
    if not (math.isfinite(dt) and dt > 0):
        raise ValidationError(f"dt must be positive, got {dt}")
    if k_prop is not None and k_prop * dt > 1.0 + 1e-12:
        raise ValidationError(f"unstable step: k_prop * dt = {k_prop * dt:.6g} exceeds 1")
    velocities = np.atleast_2d(np.asarray(velocities, dtype=float))
    if len(velocities) != len(states):
        raise ValidationError(f"{len(states)} states but {len(velocities)} velocities")
    new_states = []
    clips = 0
    for st, u in zip(states, velocities):
        q = np.array(st.position) + dt * u
        if not polygon.contains_point(q):
            q = polygon.project(q)
            clips += 1
        new_states.append(replace(st, position=(float(q[0]), float(q[1]))))
    return new_states, clips


def terminated(states, moments, threshold: float) -> bool:
    """True when every agent is within `threshold` of its cell centroid."""
    worst = 0.0
    for st, mom in zip(states, moments):
        d = np.array(st.position) - np.asarray(mom.centroid, dtype=float)
        worst = max(worst, float(np.hypot(d[0], d[1])))
    return worst < threshold
