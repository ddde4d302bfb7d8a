"""Per-agent sensing-effectiveness functions and distance metrics.

A node function maps the distance between a sensor and a point to a strictly
decreasing effectiveness value; the generalized partition compares these
values across agents instead of raw distances. Distances may be measured in
an anisotropic SPD metric, and a range limit saturates the function to a
constant beyond the cutoff radius.

Families (s denotes squared distance, all scaled by the positive weight
``alpha``):

* weighted_linear      -alpha * r - d_add
* quadratic            -alpha * r**2
* standard             -alpha * r           (alpha defaults to 1)
* power                -alpha * (r**2 - R_power**2), the sign-negated power
                       distance, so larger values still mean more effective
* custom_polynomial    alpha * sum(c_k * s**k); non-constant coefficients
                       must be <= 0 with at least one strictly negative
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from numpy.polynomial import polynomial as npp

from .errors import SingularityError, ValidationError

FAMILIES = ("weighted_linear", "quadratic", "standard", "power", "custom_polynomial")

# Families whose slope in squared distance diverges like -alpha/(2 r) at r = 0.
SINGULAR_AT_ZERO = frozenset({"weighted_linear", "standard"})


@dataclass(frozen=True)
class Metric2x2:
    """Symmetric positive-definite metric; r = sqrt((q - p)^T L (q - p))."""

    L: tuple[tuple[float, float], tuple[float, float]]

    def __post_init__(self):
        try:
            rows = tuple(tuple(float(v) for v in row) for row in self.L)
        except (TypeError, ValueError):
            raise ValidationError("metric L must be a 2x2 matrix of numbers") from None
        if len(rows) != 2 or any(len(r) != 2 for r in rows):
            raise ValidationError("metric L must be a 2x2 matrix")
        object.__setattr__(self, "L", rows)
        (a, b), (c, d) = rows
        if not all(math.isfinite(v) for v in (a, b, c, d)):
            raise ValidationError("metric entries must be finite")
        scale = max(abs(a), abs(b), abs(c), abs(d), 1.0)
        if abs(b - c) > 1e-9 * scale:
            raise ValidationError(f"metric L must be symmetric, got off-diagonals {b} and {c}")
        if a <= 0.0 or a * d - b * c <= 0.0:
            raise ValidationError("metric L must be positive definite")

    @classmethod
    def identity(cls) -> "Metric2x2":
        return cls(((1.0, 0.0), (0.0, 1.0)))

    @classmethod
    def from_axes(cls, a: float, b: float, c: float, theta: float) -> "Metric2x2":
        """Build L = F^T F from ellipse semi-axes a, b, scale c and rotation theta."""
        if min(a, b, c) <= 0:
            raise ValidationError(f"axes and scale must be positive, got a={a}, b={b}, c={c}")
        rot = np.array(
            [[math.cos(theta), math.sin(theta)], [-math.sin(theta), math.cos(theta)]]
        )
        F = np.array([[c / a, 0.0], [0.0, c / b]]) @ rot
        L = F.T @ F
        return cls(((float(L[0, 0]), float(L[0, 1])), (float(L[1, 0]), float(L[1, 1]))))


@dataclass(frozen=True)
class NodeFunctionSpec:
    """Analytic, strictly decreasing effectiveness-versus-distance model.

    ``shift`` is a constant added to the value; it never affects slopes and
    exists so rim-shifted range-limited variants share the same type.
    """

    family: str
    alpha: float = 1.0
    d_add: float = 0.0
    R_power: float | None = None
    poly_coeffs: tuple[float, ...] | None = None
    metric: Metric2x2 | None = None
    range_limit: float | None = None
    shift: float = 0.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValidationError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "d_add", float(self.d_add))
        object.__setattr__(self, "shift", float(self.shift))
        if not (math.isfinite(self.alpha) and self.alpha > 0.0):
            raise ValidationError(f"alpha must be finite and positive, got {self.alpha}")
        if not math.isfinite(self.shift):
            raise ValidationError("shift must be finite")
        if not (math.isfinite(self.d_add) and self.d_add >= 0.0):
            raise ValidationError(f"d_add must be finite and >= 0, got {self.d_add}")
        if self.d_add != 0.0 and self.family != "weighted_linear":
            raise ValidationError(f"d_add only applies to weighted_linear, not {self.family}")
        if self.family == "power":
            if self.R_power is None:
                raise ValidationError("power family requires R_power")
            object.__setattr__(self, "R_power", float(self.R_power))
            if not (math.isfinite(self.R_power) and self.R_power >= 0.0):
                raise ValidationError(f"R_power must be finite and >= 0, got {self.R_power}")
        elif self.R_power is not None:
            raise ValidationError(f"R_power only applies to the power family, not {self.family}")
        if self.family == "custom_polynomial":
            if not self.poly_coeffs:
                raise ValidationError("custom_polynomial requires poly_coeffs")
            coeffs = tuple(float(c) for c in self.poly_coeffs)
            object.__setattr__(self, "poly_coeffs", coeffs)
            if not all(math.isfinite(c) for c in coeffs):
                raise ValidationError("poly_coeffs must be finite")
            tail = coeffs[1:]
            if not tail or any(c > 0.0 for c in tail) or not any(c < 0.0 for c in tail):
                raise ValidationError(
                    "custom_polynomial non-constant coefficients must be <= 0 with at "
                    f"least one < 0 to decrease strictly, got {coeffs}"
                )
        elif self.poly_coeffs is not None:
            raise ValidationError(f"poly_coeffs only applies to custom_polynomial, not {self.family}")
        if self.range_limit is not None:
            object.__setattr__(self, "range_limit", float(self.range_limit))
            if not (math.isfinite(self.range_limit) and self.range_limit > 0.0):
                raise ValidationError(f"range_limit must be finite and positive, got {self.range_limit}")


def sq_distance(spec: NodeFunctionSpec, p, qx, qy):
    """Squared distance from p to (qx, qy) in the spec's metric (Euclidean default)."""
    dx = np.asarray(qx, dtype=float) - p[0]
    dy = np.asarray(qy, dtype=float) - p[1]
    if spec.metric is None:
        return dx * dx + dy * dy
    (l00, l01), (_, l11) = spec.metric.L
    return l00 * (dx * dx) + (2.0 * l01) * (dx * dy) + l11 * (dy * dy)


def effectiveness_from_sq(spec: NodeFunctionSpec, sq):
    """Effectiveness from squared distance; saturation and shift applied."""
    s = np.asarray(sq, dtype=float)
    if spec.range_limit is not None:
        s = np.minimum(s, spec.range_limit * spec.range_limit)
    fam = spec.family
    if fam == "quadratic":
        base = -spec.alpha * s
    elif fam == "standard":
        base = -spec.alpha * np.sqrt(s)
    elif fam == "weighted_linear":
        base = -spec.alpha * np.sqrt(s) - spec.d_add
    elif fam == "power":
        base = -spec.alpha * (s - spec.R_power * spec.R_power)
    else:
        base = spec.alpha * npp.polyval(s, spec.poly_coeffs)
    return base + spec.shift


def slope_from_sq(spec: NodeFunctionSpec, sq):
    """d(effectiveness)/d(squared distance); zero beyond the range limit.

    Callers integrating near the agent must floor the squared distance for
    the families in SINGULAR_AT_ZERO, whose slope diverges at r = 0.
    """
    s = np.asarray(sq, dtype=float)
    fam = spec.family
    if fam in ("quadratic", "power"):
        out = np.full(s.shape, -spec.alpha)
    elif fam in SINGULAR_AT_ZERO:
        with np.errstate(divide="ignore"):
            out = -spec.alpha / (2.0 * np.sqrt(s))
    else:
        dcoeffs = tuple(k * c for k, c in enumerate(spec.poly_coeffs))[1:]
        out = spec.alpha * npp.polyval(s, dcoeffs) if dcoeffs else np.zeros(s.shape)
    if spec.range_limit is not None:
        out = np.where(s > spec.range_limit * spec.range_limit, 0.0, out)
    return out


def effectiveness(spec: NodeFunctionSpec, p, q) -> float:
    """Effectiveness of the sensor at p, measured at point q."""
    pp = (float(p[0]), float(p[1]))
    return float(effectiveness_from_sq(spec, sq_distance(spec, pp, float(q[0]), float(q[1]))))


def effectiveness_slope_sq(spec: NodeFunctionSpec, p, q) -> float:
    """Derivative of effectiveness with respect to squared distance at q.

    Raises SingularityError at q == p for the families whose slope diverges
    there (weighted_linear, standard).
    """
    pp = (float(p[0]), float(p[1]))
    s = float(sq_distance(spec, pp, float(q[0]), float(q[1])))
    if s == 0.0 and spec.family in SINGULAR_AT_ZERO:
        raise SingularityError(f"{spec.family} slope is singular at r = 0")
    return float(slope_from_sq(spec, s))


def rim_shifted(spec: NodeFunctionSpec) -> NodeFunctionSpec:
    """Copy of a range-limited spec shifted so effectiveness vanishes at the cutoff.

    The shift is constant, so slopes, partitions, and critical points are
    unchanged.
    """
    if spec.range_limit is None:
        raise ValidationError("rim_shifted requires a spec with range_limit set")
    rim = float(effectiveness_from_sq(spec, spec.range_limit * spec.range_limit))
    return replace(spec, shift=spec.shift - rim)


def check_cutoff_equality(specs, tol: float = 1e-9) -> float:
    """Range-limited runs require all agents to share one cutoff effectiveness.

    Returns the common value; raises ValidationError when a spec lacks a
    range limit or the cutoff values disagree beyond `tol`.
    """
    missing = [i for i, s in enumerate(specs) if s.range_limit is None]
    if missing:
        raise ValidationError(f"agents {missing} lack range_limit, required for limited-range runs")
    vals = [float(effectiveness_from_sq(s, s.range_limit * s.range_limit)) for s in specs]
    if max(vals) - min(vals) > tol:
        raise ValidationError(
            f"cutoff effectiveness must match across agents within {tol}, got {vals}"
        )
    return vals[0]


def validate_decreasing(spec: NodeFunctionSpec, r_max: float, samples: int = 1000) -> None:
    """Numerically check strict decrease of the unsaturated effectiveness on [0, r_max]."""
    if not (math.isfinite(r_max) and r_max > 0):
        raise ValidationError(f"r_max must be positive, got {r_max}")
    base = replace(spec, range_limit=None)
    r = np.linspace(0.0, float(r_max), samples)
    vals = effectiveness_from_sq(base, r * r)
    diffs = np.diff(vals)
    if not np.all(diffs < 0.0):
        k = int(np.argmax(diffs >= 0.0))
        raise ValidationError(
            f"{spec.family} effectiveness is not strictly decreasing near r = {r[k]:.4g}"
        )
