"""Simulation driver, distributedness verification, and record export.

One simulation step is a barrier-synchronized round: partition -> cell
moments -> controls -> Euler update. The record keeps the full per-step
history; exports are byte-stable for identical configurations.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._threads import map_indexed
from .config import RunConfig, config_from_dict, dumps_config, load_config
from .control import AgentState, compute_controls, step, terminated
from .domain import build_grid, density_values
from .errors import ValidationError
from .objective import cell_moments, coverage_objective, coverage_objective_limited
from .partition import (
    NeighborGraph,
    PartitionLabels,
    assign,
    assign_limited,
    neighbor_graph,
    save_labels,
)

_FLOAT_FMT = ".17g"


@dataclass(eq=False)
class SimRecord:
    """Per-step history of one run plus final partition snapshot.

    Step arrays have one row per recorded state; row t describes the
    configuration before the t-th Euler update. clip_counts[t] counts domain
    clips applied when leaving state t (always 0 for the last row).
    """

    config: RunConfig
    positions: np.ndarray
    objective: np.ndarray
    objective_normalized: np.ndarray
    error_measure: np.ndarray
    control_magnitudes: np.ndarray
    clip_counts: np.ndarray
    converged: bool
    n_steps: int
    final_labels: PartitionLabels | None = None
    final_graph: NeighborGraph | None = None
    final_centroids: np.ndarray | None = None

    @property
    def n_records(self) -> int:
        return int(self.positions.shape[0])


def _initial_positions(config: RunConfig, rng: np.random.Generator) -> np.ndarray:
    xmin, ymin, xmax, ymax = config.polygon.bounds
    out = []
    for i, agent in enumerate(config.agents):
        if agent.position is not None:
            out.append(np.array(agent.position, dtype=float))
            continue
        for _ in range(100000):
            q = rng.uniform((xmin, ymin), (xmax, ymax))
            if config.polygon.contains_point(q, strict=True):
                out.append(q)
                break
        else:
            raise ValidationError(f"could not sample an interior start for agent {i}")
    pos = np.array(out)
    for i in range(len(pos)):
        for j in range(i + 1, len(pos)):
            if pos[i, 0] == pos[j, 0] and pos[i, 1] == pos[j, 1]:
                raise ValidationError(f"agents {i} and {j} drew coincident starts {tuple(pos[i])}")
    return pos


def _normalize_objective(values: np.ndarray) -> np.ndarray:
    if len(values) == 0:
        return values.copy()
    lo, hi = values[0], values[-1]
    if hi == lo:
        return np.ones_like(values)
    return (values - lo) / (hi - lo)


def run_simulation(config: RunConfig) -> SimRecord:
    """Run rounds until termination or max_steps; deterministic per config.

    Non-convergence within max_steps is not an error: the record comes back
    with converged=False.
    """
    grid = build_grid(config.polygon, config.resolution)
    phi = density_values(config.density, grid)
    specs = [a.spec for a in config.agents]
    n = len(specs)
    limited = config.control.kind == "limited_range_proportional"
    assign_fn = assign_limited if limited else assign
    objective_fn = coverage_objective_limited if limited else coverage_objective
    k_prop = config.control.k_prop if config.control.kind != "constant_speed" else None

    rng = np.random.default_rng(config.seed)
    pos0 = _initial_positions(config, rng)
    states = [
        AgentState((pos0[i, 0], pos0[i, 1]), i, a.u_max, a.u_const, a.delta)
        for i, a in enumerate(config.agents)
    ]

    pos_rows, obj_rows, err_rows, mag_rows, clip_rows = [], [], [], [], []
    labels = moments = None
    converged = False
    for _ in range(config.max_steps + 1):
        P = np.array([s.position for s in states])
        labels = assign_fn(grid, P, specs)
        moments = map_indexed(
            lambda i: cell_moments(specs[i], P[i], config.density, grid, labels.owner == i, phi=phi),
            n,
        )
        value = objective_fn(grid, labels, P, specs, config.density, phi=phi)
        err = float(np.mean([np.sum((P[i] - moments[i].centroid) ** 2) for i in range(n)]))
        controls = compute_controls(config.control, states, moments)
        mags = np.hypot(controls[:, 0], controls[:, 1])

        pos_rows.append(P)
        obj_rows.append(value)
        err_rows.append(err)
        mag_rows.append(mags)

        if terminated(states, moments, config.termination_threshold):
            converged = True
            clip_rows.append(0)
            break
        if len(pos_rows) == config.max_steps + 1:
            clip_rows.append(0)
            break
        states, clips = step(states, controls, config.dt, config.polygon, k_prop=k_prop)
        clip_rows.append(clips)

    objective = np.array(obj_rows)
    return SimRecord(
        config=config,
        positions=np.array(pos_rows),
        objective=objective,
        objective_normalized=_normalize_objective(objective),
        error_measure=np.array(err_rows),
        control_magnitudes=np.array(mag_rows),
        clip_counts=np.array(clip_rows, dtype=int),
        converged=converged,
        n_steps=len(pos_rows) - 1,
        final_labels=labels,
        final_graph=neighbor_graph(labels, grid),
        final_centroids=np.array([m.centroid for m in moments]),
    )


@dataclass(frozen=True, eq=False)
class DistributednessReport:
    """Outcome of recomputing each agent's cell from its neighbors only."""

    passed: bool
    max_discrepancy: float
    per_agent_discrepancy: np.ndarray
    mismatched_cells: np.ndarray


def verify_distributedness(config: RunConfig, positions, drop_nearest: bool = False) -> DistributednessReport:
    """Check that neighbor-local information reproduces the global computation.

    For every agent, the cell and centroid are recomputed using only that
    agent and its neighbor set (taken from the cell-adjacency graph with
    diagonal contacts included, erring toward extra neighbors). The check
    passes when every restricted centroid matches the global one within 1e-9,
    which on the raster means the restricted cells are identical.

    drop_nearest removes each agent's nearest neighbor before recomputing; on
    a generic configuration this must fail, demonstrating the test has power.
    """
    grid = build_grid(config.polygon, config.resolution)
    phi = density_values(config.density, grid)
    specs = [a.spec for a in config.agents]
    P = np.atleast_2d(np.asarray(positions, dtype=float))
    if len(P) != len(specs):
        raise ValidationError(f"{len(P)} positions for {len(specs)} configured agents")
    limited = config.control.kind == "limited_range_proportional"
    assign_fn = assign_limited if limited else assign

    labels = assign_fn(grid, P, specs)
    graph = neighbor_graph(labels, grid, include_diagonal=True)
    n = len(specs)
    disc = np.zeros(n)
    mism = np.zeros(n, dtype=int)
    for i in range(n):
        nbrs = set(graph.neighbors(i))
        if drop_nearest and nbrs:
            nearest = min(nbrs, key=lambda j: float(np.sum((P[j] - P[i]) ** 2)))
            nbrs.discard(nearest)
        idx = sorted({i} | nbrs)
        sub = assign_fn(grid, P[idx], [specs[k] for k in idx])
        restricted = sub.owner == idx.index(i)
        global_mask = labels.owner == i
        mism[i] = int(np.count_nonzero(restricted != global_mask))
        m_r = cell_moments(specs[i], P[i], config.density, grid, restricted, phi=phi)
        m_g = cell_moments(specs[i], P[i], config.density, grid, global_mask, phi=phi)
        d = m_r.centroid - m_g.centroid
        disc[i] = float(np.hypot(d[0], d[1]))
    max_disc = float(disc.max()) if n else 0.0
    return DistributednessReport(max_disc < 1e-9, max_disc, disc, mism)


def _fmt(x: float) -> str:
    return format(float(x), _FLOAT_FMT)


def export_record(record: SimRecord, out_dir, fmt: str = "csv") -> list[Path]:
    """Write the record to `out_dir`; returns the created file paths.

    csv format: trajectories.csv (step, agent, x, y, speed), metrics.csv
    (step, H, H_normalized, error_measure), labels.txt, config.json.
    json format replaces the two CSV files with record.json. Outputs are
    byte-identical across runs with the same configuration.
    """
    if fmt not in ("csv", "json"):
        raise ValidationError(f"unknown export format {fmt!r}; expected 'csv' or 'json'")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = []

    cfg_path = out / "config.json"
    cfg_path.write_text(dumps_config(record.config) + "\n")
    files.append(cfg_path)

    labels_path = out / "labels.txt"
    if record.final_labels is not None:
        save_labels(record.final_labels, labels_path)
    else:
        labels_path.write_text("")
    files.append(labels_path)

    T = record.n_records
    if fmt == "csv":
        lines = ["step,agent,x,y,speed"]
        for t in range(T):
            for a in range(record.positions.shape[1]):
                lines.append(
                    f"{t},{a},{_fmt(record.positions[t, a, 0])},"
                    f"{_fmt(record.positions[t, a, 1])},{_fmt(record.control_magnitudes[t, a])}"
                )
        traj = out / "trajectories.csv"
        traj.write_text("\n".join(lines) + "\n")
        files.append(traj)

        lines = ["step,H,H_normalized,error_measure"]
        for t in range(T):
            lines.append(
                f"{t},{_fmt(record.objective[t])},{_fmt(record.objective_normalized[t])},"
                f"{_fmt(record.error_measure[t])}"
            )
        metrics = out / "metrics.csv"
        metrics.write_text("\n".join(lines) + "\n")
        files.append(metrics)
    else:
        payload = {
            "positions": record.positions.tolist(),
            "H": record.objective.tolist(),
            "H_normalized": record.objective_normalized.tolist(),
            "error_measure": record.error_measure.tolist(),
            "control_magnitudes": record.control_magnitudes.tolist(),
            "clip_counts": record.clip_counts.tolist(),
            "converged": record.converged,
            "n_steps": record.n_steps,
        }
        rec = out / "record.json"
        rec.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        files.append(rec)
    return files


def _read_csv(path) -> list:
    lines = [ln for ln in Path(path).read_text().splitlines()[1:] if ln.strip()]
    return [np.array([float(tok) for tok in ln.split(",")]) for ln in lines]


def load_record(record_dir) -> SimRecord:
    """Rebuild a renderable SimRecord from an exported directory.

    Final centroids are recomputed from the configuration and the last
    positions; per-step clip counts are not stored in CSV exports and load
    as zeros.
    """
    d = Path(record_dir)
    config = load_config(d / "config.json")
    n = len(config.agents)

    rec_json = d / "record.json"
    if rec_json.exists():
        payload = json.loads(rec_json.read_text())
        positions = np.array(payload["positions"], dtype=float).reshape(-1, n, 2)
        objective = np.array(payload["H"], dtype=float)
        normalized = np.array(payload["H_normalized"], dtype=float)
        error = np.array(payload["error_measure"], dtype=float)
        mags = np.array(payload["control_magnitudes"], dtype=float).reshape(-1, n)
        clips = np.array(payload["clip_counts"], dtype=int)
        converged = bool(payload["converged"])
        n_steps = int(payload["n_steps"])
    else:
        traj = _read_csv(d / "trajectories.csv")
        metrics_rows = _read_csv(d / "metrics.csv")
        metrics = np.array(metrics_rows) if metrics_rows else np.zeros((0, 4))
        T = len(metrics)
        positions = np.zeros((T, n, 2))
        mags = np.zeros((T, n))
        for row in traj:
            t, a = int(row[0]), int(row[1])
            positions[t, a] = row[2:4]
            mags[t, a] = row[4]
        objective = metrics[:, 1] if T else np.zeros(0)
        normalized = metrics[:, 2] if T else np.zeros(0)
        error = metrics[:, 3] if T else np.zeros(0)
        clips = np.zeros(T, dtype=int)
        converged = False
        n_steps = max(T - 1, 0)

    final_labels = final_graph = final_centroids = None
    if positions.shape[0]:
        grid = build_grid(config.polygon, config.resolution)
        phi = density_values(config.density, grid)
        specs = [a.spec for a in config.agents]
        P = positions[-1]
        limited = config.control.kind == "limited_range_proportional"
        labels = (assign_limited if limited else assign)(grid, P, specs)
        moments = [
            cell_moments(specs[i], P[i], config.density, grid, labels.owner == i, phi=phi)
            for i in range(n)
        ]
        final_labels = labels
        final_graph = neighbor_graph(labels, grid)
        final_centroids = np.array([m.centroid for m in moments])
        if not rec_json.exists():
            worst = max(
                float(np.hypot(*(P[i] - moments[i].centroid))) for i in range(n)
            )
            converged = worst < config.termination_threshold

    return SimRecord(
        config=config,
        positions=positions,
        objective=objective,
        objective_normalized=normalized,
        error_measure=error,
        control_magnitudes=mags,
        clip_counts=clips,
        converged=converged,
        n_steps=n_steps,
        final_labels=final_labels,
        final_graph=final_graph,
        final_centroids=final_centroids,
    )
