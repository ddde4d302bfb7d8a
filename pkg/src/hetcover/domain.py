"""Convex mission domain, its raster discretization, and density fields.

Every integral in the package is a midpoint sum over a uniform square grid:
cells whose centers fall inside the polygon carry weight cell_size**2, all
other cells carry none. Grids and fields are immutable once built and safe
to share across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import DomainError, ValidationError

DENSITY_KINDS = ("uniform", "gaussian", "sampled")


@dataclass(frozen=True)
class ConvexPolygon:
    """Convex planar polygon, vertices ordered counterclockwise."""

    vertices: tuple[tuple[float, float], ...]

    def __post_init__(self):
        verts = tuple((float(x), float(y)) for x, y in self.vertices)
        object.__setattr__(self, "vertices", verts)
        n = len(verts)
        if n < 3:
            raise ValidationError(f"polygon needs at least 3 vertices, got {n}")
        arr = np.array(verts, dtype=float)
        if not np.all(np.isfinite(arr)):
            raise ValidationError("polygon vertices must be finite")
        scale = max(float(np.abs(arr).max()), 1.0)
        tol = 1e-12 * scale * scale
        for k in range(n):
            a, b, c = verts[k], verts[(k + 1) % n], verts[(k + 2) % n]
            cross = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0])
            triple = f"vertices {k},{(k + 1) % n},{(k + 2) % n} = {a}, {b}, {c}"
            if abs(cross) <= tol:
                raise ValidationError(f"collinear vertex triple: {triple}")
            if cross < 0.0:
                raise ValidationError(
                    "clockwise turn (vertices must be counterclockwise and "
                    f"strictly convex): {triple}"
                )

    @cached_property
    def array(self) -> np.ndarray:
        a = np.array(self.vertices, dtype=float)
        a.setflags(write=False)
        return a

    @cached_property
    def area(self) -> float:
        x, y = self.array[:, 0], self.array[:, 1]
        return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))

    @cached_property
    def centroid(self) -> tuple[float, float]:
        x, y = self.array[:, 0], self.array[:, 1]
        cross = x * np.roll(y, -1) - np.roll(x, -1) * y
        cx = float(np.sum((x + np.roll(x, -1)) * cross) / (6.0 * self.area))
        cy = float(np.sum((y + np.roll(y, -1)) * cross) / (6.0 * self.area))
        return cx, cy

    @cached_property
    def bounds(self) -> tuple[float, float, float, float]:
        a = self.array
        return (
            float(a[:, 0].min()),
            float(a[:, 1].min()),
            float(a[:, 0].max()),
            float(a[:, 1].max()),
        )

    @cached_property
    def diameter(self) -> float:
        a = self.array
        d2 = np.sum((a[:, None, :] - a[None, :, :]) ** 2, axis=-1)
        return float(np.sqrt(d2.max()))

    def contains(self, x, y) -> np.ndarray:
        """Vectorized point-in-polygon test; boundary points count as inside."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        inside = np.full(np.broadcast_shapes(x.shape, y.shape), True)
        tol = 1e-12 * max(self.diameter, 1.0) ** 2
        v = self.vertices
        n = len(v)
        for k in range(n):
            ax, ay = v[k]
            bx, by = v[(k + 1) % n]
            inside &= (bx - ax) * (y - ay) - (by - ay) * (x - ax) >= -tol
        return inside

    def contains_point(self, p, strict: bool = False) -> bool:
        px, py = float(p[0]), float(p[1])
        tol = 1e-12 * max(self.diameter, 1.0) ** 2
        v = self.vertices
        n = len(v)
        worst = math.inf
        for k in range(n):
            ax, ay = v[k]
            bx, by = v[(k + 1) % n]
            worst = min(worst, (bx - ax) * (py - ay) - (by - ay) * (px - ax))
        return worst > tol if strict else worst >= -tol

    def project(self, p) -> np.ndarray:
        """Closest polygon point to p (p itself when already inside)."""
        q = np.array([float(p[0]), float(p[1])])
        if self.contains_point(q):
            return q
        v = self.array
        n = len(v)
        best, best_d2 = q, math.inf
        for k in range(n):
            a, b = v[k], v[(k + 1) % n]
            ab = b - a
            t = float(np.clip(np.dot(q - a, ab) / np.dot(ab, ab), 0.0, 1.0))
            c = a + t * ab
            d2 = float(np.dot(q - c, q - c))
            if d2 < best_d2:
                best, best_d2 = c, d2
        return best


@dataclass(frozen=True, eq=False)
class Grid:
    """Uniform square raster covering the polygon's bounding box.

    Arrays are indexed [iy, ix] with row 0 at minimum y; cell (iy, ix) has
    center (origin_x + (ix + 0.5) * cell_size, origin_y + (iy + 0.5) * cell_size).
    """

    polygon: ConvexPolygon
    origin: tuple[float, float]
    cell_size: float
    nx: int
    ny: int
    inside_mask: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return (self.ny, self.nx)

    @cached_property
    def xc(self) -> np.ndarray:
        return self.origin[0] + (np.arange(self.nx) + 0.5) * self.cell_size

    @cached_property
    def yc(self) -> np.ndarray:
        return self.origin[1] + (np.arange(self.ny) + 0.5) * self.cell_size

    @cached_property
    def xx(self) -> np.ndarray:
        return np.broadcast_to(self.xc[None, :], self.shape)

    @cached_property
    def yy(self) -> np.ndarray:
        return np.broadcast_to(self.yc[:, None], self.shape)

    @cached_property
    def inside_count(self) -> int:
        return int(np.count_nonzero(self.inside_mask))

    @property
    def extent(self) -> tuple[float, float, float, float]:
        ox, oy = self.origin
        return (ox, ox + self.nx * self.cell_size, oy, oy + self.ny * self.cell_size)


def build_grid(polygon: ConvexPolygon, resolution: float) -> Grid:
    """Raster the polygon's bounding box at `resolution` cells per unit length."""
    if not (np.isfinite(resolution) and resolution > 0):
        raise ValidationError(f"resolution must be positive, got {resolution}")
    cell = 1.0 / float(resolution)
    xmin, ymin, xmax, ymax = polygon.bounds
    nx = max(1, math.ceil((xmax - xmin) / cell - 1e-9))
    ny = max(1, math.ceil((ymax - ymin) / cell - 1e-9))
    xc = xmin + (np.arange(nx) + 0.5) * cell
    yc = ymin + (np.arange(ny) + 0.5) * cell
    inside = polygon.contains(xc[None, :], yc[:, None])
    inside.setflags(write=False)
    return Grid(polygon, (xmin, ymin), cell, nx, ny, inside)


@dataclass(frozen=True, eq=False)
class DensityField:
    """Scalar event density over the domain with values in [0, 1]."""

    kind: str
    level: float | None = None
    amplitude: float | None = None
    decay: float | None = None
    center: tuple[float, float] | None = None
    values: np.ndarray | None = None
    source_path: str | None = None

    def __post_init__(self):
        if self.kind not in DENSITY_KINDS:
            raise ValidationError(f"unknown density kind {self.kind!r}; expected one of {DENSITY_KINDS}")
        if self.kind == "uniform":
            if self.level is None or not (0.0 < float(self.level) <= 1.0):
                raise ValidationError(f"uniform density level must be in (0, 1], got {self.level}")
            object.__setattr__(self, "level", float(self.level))
        elif self.kind == "gaussian":
            if self.amplitude is None or not (0.0 < float(self.amplitude) <= 1.0):
                raise ValidationError(
                    f"gaussian amplitude must be in (0, 1] so values stay in [0, 1], got {self.amplitude}"
                )
            if self.decay is None or not (np.isfinite(self.decay) and float(self.decay) >= 0.0):
                raise ValidationError(f"gaussian decay must be finite and >= 0, got {self.decay}")
            if self.center is None or len(self.center) != 2:
                raise ValidationError("gaussian density needs a 2-D center")
            object.__setattr__(self, "amplitude", float(self.amplitude))
            object.__setattr__(self, "decay", float(self.decay))
            object.__setattr__(self, "center", (float(self.center[0]), float(self.center[1])))
        else:
            vals = np.array(self.values, dtype=float)
            if vals.ndim != 2 or vals.size == 0:
                raise ValidationError("sampled density needs a non-empty 2-D value matrix")
            if not np.all(np.isfinite(vals)):
                raise ValidationError("sampled density values must be finite")
            if vals.min() < -1e-12 or vals.max() > 1.0 + 1e-12:
                raise ValidationError(
                    f"sampled density values must lie in [0, 1], got range [{vals.min()}, {vals.max()}]"
                )
            vals.setflags(write=False)
            object.__setattr__(self, "values", vals)

    @classmethod
    def uniform(cls, level: float) -> "DensityField":
        return cls(kind="uniform", level=level)

    @classmethod
    def gaussian(cls, amplitude: float, decay: float, center) -> "DensityField":
        return cls(kind="gaussian", amplitude=amplitude, decay=decay, center=tuple(center))

    @classmethod
    def sampled(cls, values, source_path: str | None = None) -> "DensityField":
        return cls(kind="sampled", values=values, source_path=source_path)

    def __eq__(self, other):
        if not isinstance(other, DensityField):
            return NotImplemented
        if (self.kind, self.level, self.amplitude, self.decay, self.center, self.source_path) != (
            other.kind,
            other.level,
            other.amplitude,
            other.decay,
            other.center,
            other.source_path,
        ):
            return False
        if self.values is None or other.values is None:
            return self.values is None and other.values is None
        return bool(np.array_equal(self.values, other.values))


def density_values(field: DensityField, grid: Grid) -> np.ndarray:
    """Density at every cell center, shape (ny, nx)."""
    if field.kind == "uniform":
        return np.full(grid.shape, field.level)
    if field.kind == "gaussian":
        cx, cy = field.center
        d2 = (grid.xx - cx) ** 2 + (grid.yy - cy) ** 2
        return field.amplitude * np.exp(-field.decay * d2)
    if field.values.shape != grid.shape:
        raise ValidationError(
            f"sampled density shape {field.values.shape} does not match grid {grid.shape}"
        )
    return field.values


def density_at(field: DensityField, grid: Grid, q) -> float:
    """Density at point q, which must lie within the grid extent.

    Sampled fields are interpolated bilinearly between cell-center values
    (clamped inside the outermost centers).
    """
    qx, qy = float(q[0]), float(q[1])
    x0, x1, y0, y1 = grid.extent
    tol = 1e-9 * max(x1 - x0, y1 - y0)
    if not (x0 - tol <= qx <= x1 + tol and y0 - tol <= qy <= y1 + tol):
        raise DomainError(f"point ({qx}, {qy}) lies outside the grid extent {grid.extent}")
    if field.kind == "uniform":
        return field.level
    if field.kind == "gaussian":
        cx, cy = field.center
        return field.amplitude * math.exp(-field.decay * ((qx - cx) ** 2 + (qy - cy) ** 2))
    vals = field.values
    if vals.shape != grid.shape:
        raise ValidationError(
            f"sampled density shape {vals.shape} does not match grid {grid.shape}"
        )
    gx = min(max((qx - grid.origin[0]) / grid.cell_size - 0.5, 0.0), grid.nx - 1.0)
    gy = min(max((qy - grid.origin[1]) / grid.cell_size - 0.5, 0.0), grid.ny - 1.0)
    i0, j0 = int(gx), int(gy)
    i1, j1 = min(i0 + 1, grid.nx - 1), min(j0 + 1, grid.ny - 1)
    fx, fy = gx - i0, gy - j0
    top = (1.0 - fx) * vals[j1, i0] + fx * vals[j1, i1]
    bot = (1.0 - fx) * vals[j0, i0] + fx * vals[j0, i1]
    return float((1.0 - fy) * bot + fy * top)


def integrate(grid: Grid, mask, values) -> float:
    """Midpoint quadrature: sum of `values` over masked cells times cell area.

    The summation order is fixed (row-major), so results do not depend on
    caller threading.
    """
    mask = np.asarray(mask, dtype=bool)
    values = np.asarray(values, dtype=float)
    if mask.shape != grid.shape:
        raise ValidationError(f"mask shape {mask.shape} does not match grid {grid.shape}")
    if values.shape != grid.shape:
        raise ValidationError(f"values shape {values.shape} does not match grid {grid.shape}")
    return float(np.sum(np.where(mask, values, 0.0)) * grid.cell_size**2)


def load_sampled_density(path) -> DensityField:
    """Read a sampled density matrix file.

    Format: first line "nx ny", then ny rows of nx space-separated values in
    [0, 1]; row 0 corresponds to minimum y.
    """
    p = Path(path)
    try:
        lines = [ln for ln in p.read_text().splitlines() if ln.strip()]
    except OSError as exc:
        raise ValidationError(f"{p}: cannot read density file ({exc})") from exc
    if not lines:
        raise ValidationError(f"{p}: empty density file")
    head = lines[0].split()
    if len(head) != 2:
        raise ValidationError(f"{p}: first line must be 'nx ny', got {lines[0]!r}")
    try:
        nx, ny = int(head[0]), int(head[1])
    except ValueError:
        raise ValidationError(f"{p}: first line must be 'nx ny', got {lines[0]!r}") from None
    if len(lines) - 1 != ny:
        raise ValidationError(f"{p}: expected {ny} data rows, found {len(lines) - 1}")
    rows = []
    for j, ln in enumerate(lines[1:]):
        try:
            vals = [float(tok) for tok in ln.split()]
        except ValueError:
            raise ValidationError(f"{p}: non-numeric value in row {j}") from None
        if len(vals) != nx:
            raise ValidationError(f"{p}: row {j} has {len(vals)} values, expected {nx}")
        rows.append(vals)
    return DensityField.sampled(np.array(rows), source_path=str(p))
