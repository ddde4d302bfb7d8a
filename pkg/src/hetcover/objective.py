"""Coverage objective, weighted cell moments, and gradients.

The effective density of a cell is the event density rescaled by the negated
slope of its owner's effectiveness in squared distance; the mass and centroid
of each cell under that density drive all control laws. The analytic gradient
of the objective with respect to an agent position is

    2 * mass * (centroid - position)

per the chain rule in squared distance (boundary terms between adjacent cells
cancel because effectiveness values match along shared boundaries). A
finite-difference routine provides an independent cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .domain import DensityField, Grid, density_values, integrate
from .errors import ValidationError
from .node_functions import (
    SINGULAR_AT_ZERO,
    check_cutoff_equality,
    effectiveness_from_sq,
    slope_from_sq,
    sq_distance,
)
from .partition import PartitionLabels, assign


@dataclass(frozen=True, eq=False)
class CellMoments:
    """Mass and centroid of one agent's cell under the effective density."""

    mass: float
    centroid: np.ndarray
    empty: bool


def _check_consistent(grid: Grid, labels: PartitionLabels, positions: np.ndarray, specs) -> None:
    if labels.owner.shape != grid.shape:
        raise ValidationError(f"labels shape {labels.owner.shape} does not match grid {grid.shape}")
    if labels.n_agents != len(positions) or len(specs) != len(positions):
        raise ValidationError(
            f"labels cover {labels.n_agents} agents but got {len(positions)} positions "
            f"and {len(specs)} specs"
        )


def effective_density(spec, p, field: DensityField, grid: Grid, mask, phi=None) -> np.ndarray:
    """Per-cell effective density over `mask`, zero elsewhere; always >= 0.

    For families with a singular slope at r = 0 the squared distance is
    floored at (cell_size / 4)**2, which bounds the quadrature error in the
    cell hosting the agent without special-casing the optimum.

    `phi` may carry precomputed density values for the grid.
    """
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != grid.shape:
        raise ValidationError(f"mask shape {mask.shape} does not match grid {grid.shape}")
    if np.any(mask & ~grid.inside_mask):
        raise ValidationError("mask includes cells outside the domain")
    out = np.zeros(grid.shape)
    if not mask.any():
        return out
    phiv = density_values(field, grid) if phi is None else phi
    pp = (float(p[0]), float(p[1]))
    sq = sq_distance(spec, pp, grid.xx[mask], grid.yy[mask])
    if spec.family in SINGULAR_AT_ZERO:
        sq = np.maximum(sq, (grid.cell_size / 4.0) ** 2)
    out[mask] = -phiv[mask] * slope_from_sq(spec, sq)
    return out


def cell_moments(spec, p, field: DensityField, grid: Grid, mask, phi=None) -> CellMoments:
    """Mass and centroid of a cell under the effective density.

    An empty mask or negligible mass (< 1e-12) yields empty=True with the
    centroid defined as the agent's own position.
    """
    dens = effective_density(spec, p, field, grid, mask, phi=phi)
    mask = np.asarray(mask, dtype=bool)
    mass = integrate(grid, mask, dens)
    if not mask.any() or mass < 1e-12:
        return CellMoments(mass, np.array([float(p[0]), float(p[1])]), True)
    cx = integrate(grid, mask, grid.xx * dens) / mass
    cy = integrate(grid, mask, grid.yy * dens) / mass
    return CellMoments(mass, np.array([cx, cy]), False)


def coverage_objective(grid: Grid, labels: PartitionLabels, positions, specs, field: DensityField, phi=None) -> float:
    """Integral of owner effectiveness times density over all owned cells.

    On labels produced by `assign` this equals the integral of the per-cell
    maximum over agents, by construction of the labels.
    """
    pos = np.atleast_2d(np.asarray(positions, dtype=float))
    _check_consistent(grid, labels, pos, specs)
    phiv = density_values(field, grid) if phi is None else phi
    vals = np.zeros(grid.shape)
    for i, spec in enumerate(specs):
        m = labels.owner == i
        if not m.any():
            continue
        sq = sq_distance(spec, (pos[i, 0], pos[i, 1]), grid.xx[m], grid.yy[m])
        vals[m] = effectiveness_from_sq(spec, sq) * phiv[m]
    return integrate(grid, labels.owner >= 0, vals)


def coverage_objective_limited(grid: Grid, labels: PartitionLabels, positions, specs, field: DensityField, phi=None) -> float:
    """Range-limited objective.

    Owned cells use the saturated effectiveness; interior cells owned by no
    one contribute the common cutoff constant. The constant tail keeps the
    value continuous in the positions, leaves gradients untouched, and makes
    the R -> infinity limit match the unlimited objective exactly.
    """
    cut = check_cutoff_equality(specs)
    phiv = density_values(field, grid) if phi is None else phi
    base = coverage_objective(grid, labels, positions, specs, field, phi=phiv)
    unowned = grid.inside_mask & (labels.owner < 0)
    return base + cut * integrate(grid, unowned, phiv)


def analytic_gradient(grid: Grid, labels: PartitionLabels, positions, specs, field: DensityField, phi=None) -> np.ndarray:
    """Objective gradient per agent: 2 * mass * (centroid - position).

    Agents with empty cells get an exactly zero gradient. Works for limited
    labels too, where the moments are those of the range-restricted cells.
    """
    pos = np.atleast_2d(np.asarray(positions, dtype=float))
    _check_consistent(grid, labels, pos, specs)
    phiv = density_values(field, grid) if phi is None else phi
    grad = np.zeros((len(pos), 2))
    for i, spec in enumerate(specs):
        mom = cell_moments(spec, pos[i], field, grid, labels.owner == i, phi=phiv)
        if not mom.empty:
            grad[i] = 2.0 * mom.mass * (mom.centroid - pos[i])
    return grad


@dataclass(frozen=True, eq=False)
class FdGradient:
    """Finite-difference gradient plus flags marking one-sided components."""

    gradient: np.ndarray
    one_sided: np.ndarray


def finite_difference_gradient(grid: Grid, positions, specs, field: DensityField, h: float = 0.1, phi=None) -> FdGradient:
    """Central differences of the coverage objective, one component at a time.

    The partition is fully recomputed at every displaced configuration. When
    a displacement would leave the domain, a one-sided difference is used and
    flagged. Steps well above the cell size (default 0.1 = 5 cells at the
    default resolution) keep raster relabeling noise below truncation error.
    """
    if not (np.isfinite(h) and h > 0):
        raise ValidationError(f"finite-difference step must be positive, got {h}")
    pos = np.atleast_2d(np.asarray(positions, dtype=float))
    n = len(pos)
    phiv = density_values(field, grid) if phi is None else phi
    poly = grid.polygon

    def value(P):
        lbl = assign(grid, P, specs)
        return coverage_objective(grid, lbl, P, specs, field, phi=phiv)

    base_value = None
    grad = np.zeros((n, 2))
    flags = np.zeros((n, 2), dtype=bool)
    for i in range(n):
        for c in range(2):
            plus = pos.copy()
            plus[i, c] += h
            minus = pos.copy()
            minus[i, c] -= h
            ok_plus = poly.contains_point(plus[i])
            ok_minus = poly.contains_point(minus[i])
            if ok_plus and ok_minus:
                grad[i, c] = (value(plus) - value(minus)) / (2.0 * h)
            elif ok_plus or ok_minus:
                if base_value is None:
                    base_value = value(pos)
                if ok_plus:
                    grad[i, c] = (value(plus) - base_value) / h
                else:
                    grad[i, c] = (base_value - value(minus)) / h
                flags[i, c] = True
            else:
                raise ValidationError(
                    f"step h={h} exits the domain on both sides for agent {i}, axis {c}"
                )
    return FdGradient(grad, flags)
