"""Generalized Voronoi assignment on the raster and the induced neighbor graph.

Each inside cell is labeled with the agent whose effectiveness at that cell
is largest; cells can be claimed by no one in range-limited mode. Cells of
one agent may be empty or disconnected, which is why the partition is
computed per cell rather than as bisector geometry.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._threads import map_indexed
from .domain import Grid
from .errors import ValidationError
from .node_functions import check_cutoff_equality, effectiveness_from_sq, sq_distance


@dataclass(frozen=True, eq=False)
class PartitionLabels:
    """Per-cell owner indices; -1 marks cells owned by no agent."""

    owner: np.ndarray
    n_agents: int


@dataclass(frozen=True)
class NeighborGraph:
    """Undirected adjacency between agents whose cells touch on the raster."""

    n_agents: int
    edges: frozenset

    def neighbors(self, i: int) -> tuple[int, ...]:
        out = set()
        for a, b in self.edges:
            if a == i:
                out.add(b)
            elif b == i:
                out.add(a)
        return tuple(sorted(out))


def _validated_positions(grid: Grid, positions, specs) -> np.ndarray:
    pos = np.atleast_2d(np.asarray(positions, dtype=float))
    if pos.size == 0:
        raise ValidationError("agent list must not be empty")
    if pos.ndim != 2 or pos.shape[1] != 2:
        raise ValidationError(f"positions must be an (N, 2) array, got shape {pos.shape}")
    if len(specs) != len(pos):
        raise ValidationError(f"{len(pos)} positions but {len(specs)} node-function specs")
    for i, p in enumerate(pos):
        if not grid.polygon.contains_point(p):
            raise ValidationError(f"agent {i} position {tuple(p)} lies outside the domain")
    for i in range(len(pos)):
        for j in range(i + 1, len(pos)):
            if pos[i, 0] == pos[j, 0] and pos[i, 1] == pos[j, 1]:
                raise ValidationError(f"agents {i} and {j} have coincident positions {tuple(pos[i])}")
    return pos


def assign(grid: Grid, positions, specs) -> PartitionLabels:
    """Label every inside cell with the agent of largest effectiveness there.

    Ties go to the lowest agent index so outputs are deterministic.
    """
    pos = _validated_positions(grid, positions, specs)
    n = len(pos)
    scores = np.empty((n, grid.ny, grid.nx))

    def fill(i):
        scores[i] = effectiveness_from_sq(
            specs[i], sq_distance(specs[i], pos[i], grid.xx, grid.yy)
        )

    map_indexed(fill, n)
    owner = scores.argmax(axis=0)
    owner = np.where(grid.inside_mask, owner, -1)
    return PartitionLabels(owner, n)


def assign_limited(grid: Grid, positions, specs) -> PartitionLabels:
    """Assign cells, then drop any cell beyond its owner's sensing radius.

    Requires every spec to carry a range_limit and all cutoff effectiveness
    values to agree (checked); dropped cells are labeled -1.
    """
    check_cutoff_equality(specs)
    labels = assign(grid, positions, specs)
    pos = np.atleast_2d(np.asarray(positions, dtype=float))
    owner = labels.owner.copy()
    for i, spec in enumerate(specs):
        sel = owner == i
        if not sel.any():
            continue
        dx = grid.xx[sel] - pos[i, 0]
        dy = grid.yy[sel] - pos[i, 1]
        beyond = dx * dx + dy * dy > spec.range_limit * spec.range_limit
        if beyond.any():
            owner[sel] = np.where(beyond, -1, i)
    return PartitionLabels(owner, labels.n_agents)


def neighbor_graph(labels: PartitionLabels, grid: Grid, include_diagonal: bool = False) -> NeighborGraph:
    """Agents are neighbors when a cell of one 4-touches a cell of the other.

    include_diagonal also links cells meeting only at a corner; the
    distributedness verifier enables it to err toward extra neighbors.
    """
    o = labels.owner
    shifted = [(o[:, :-1], o[:, 1:]), (o[:-1, :], o[1:, :])]
    if include_diagonal:
        shifted += [(o[:-1, :-1], o[1:, 1:]), (o[:-1, 1:], o[1:, :-1])]
    pairs = []
    for a, b in shifted:
        m = (a != b) & (a >= 0) & (b >= 0)
        if m.any():
            pairs.append(np.stack([a[m], b[m]], axis=1))
    if pairs:
        ab = np.concatenate(pairs)
        lo = ab.min(axis=1)
        hi = ab.max(axis=1)
        edges = frozenset(zip(lo.tolist(), hi.tolist()))
    else:
        edges = frozenset()
    return NeighborGraph(labels.n_agents, edges)


def cell_mask(labels: PartitionLabels, i: int) -> np.ndarray:
    """Boolean mask of the cells owned by agent i (possibly empty)."""
    if not 0 <= i < labels.n_agents:
        raise ValidationError(f"agent index {i} out of range [0, {labels.n_agents})")
    return labels.owner == i


def save_labels(labels: PartitionLabels, path) -> None:
    """Write owner indices as a plain text matrix; row 0 = minimum y, -1 = none."""
    np.savetxt(path, labels.owner, fmt="%d")
