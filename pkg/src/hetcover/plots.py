"""Vector-graphic figures: trajectories, final partition, convergence history."""

from __future__ import annotations

from pathlib import Path

import numpy as np
from matplotlib import colormaps
from matplotlib.figure import Figure

from .domain import build_grid
from .errors import ValidationError

FIGURE_KINDS = ("trajectories", "partition", "convergence")


def render_figure(record, kind: str, out_path=None) -> Path:
    """Render one figure from a simulation record and return the SVG path.

    trajectories: agent paths with '+' at initial positions and hollow 'o'
    at the final cell centroids. partition: final owner of every cell.
    convergence: normalized objective and normalized error measure per step.
    """
    if kind not in FIGURE_KINDS:
        raise ValidationError(f"unknown figure kind {kind!r}; expected one of {FIGURE_KINDS}")
    if record.n_records == 0:
        raise ValidationError("cannot render an empty record")
    out = Path(out_path) if out_path is not None else Path(record.config.output_dir) / f"{kind}.svg"
    if out.suffix == "":
        out = out.with_suffix(".svg")
    out.parent.mkdir(parents=True, exist_ok=True)

    fig = Figure(figsize=(6.4, 4.8) if kind == "convergence" else (6.0, 6.0))
    ax = fig.add_subplot()
    if kind == "trajectories":
        _draw_trajectories(ax, record)
    elif kind == "partition":
        _draw_partition(ax, record)
    else:
        _draw_convergence(ax, record)
    fig.savefig(out)
    return out


def _polygon_outline(ax, polygon):
    ring = np.vstack([polygon.array, polygon.array[:1]])
    ax.plot(ring[:, 0], ring[:, 1], color="0.3", lw=1.0)


def _agent_color(i: int):
    return colormaps["tab10"](i % 10)


def _draw_trajectories(ax, record):
    _polygon_outline(ax, record.config.polygon)
    n = record.positions.shape[1]
    for a in range(n):
        xs = record.positions[:, a, 0]
        ys = record.positions[:, a, 1]
        col = _agent_color(a)
        ax.plot(xs, ys, "-", color=col, lw=1.0)
        ax.plot(xs[0], ys[0], "+", color=col, ms=10, mew=2)
    if record.final_centroids is not None:
        ax.plot(
            record.final_centroids[:, 0],
            record.final_centroids[:, 1],
            "o",
            mfc="none",
            mec="black",
            ms=8,
            ls="none",
        )
    ax.set_aspect("equal")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_title("Sensor trajectories")


def _draw_partition(ax, record):
    if record.final_labels is None:
        raise ValidationError("record has no final partition snapshot")
    grid = build_grid(record.config.polygon, record.config.resolution)
    owner = np.ma.masked_less(record.final_labels.owner, 0)
    n = max(record.final_labels.n_agents - 1, 1)
    ax.imshow(
        owner,
        origin="lower",
        extent=grid.extent,
        cmap="tab20",
        interpolation="nearest",
        vmin=0,
        vmax=n,
    )
    _polygon_outline(ax, record.config.polygon)
    final = record.positions[-1]
    ax.plot(final[:, 0], final[:, 1], "k.", ms=6)
    ax.set_aspect("equal")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_title("Final partition")


def _draw_convergence(ax, record):
    steps = np.arange(record.n_records)
    ax.plot(steps, record.objective_normalized, label="normalized objective")
    err = record.error_measure
    peak = float(err.max()) if err.size else 0.0
    err_norm = err / peak if peak > 0 else np.zeros_like(err)
    ax.plot(steps, err_norm, label="normalized error measure")
    ax.set_ylim(0.0, 1.0)
    ax.set_xlabel("step")
    ax.legend()
    ax.set_title("Convergence history")
