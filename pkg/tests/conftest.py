"""Shared builders and session fixtures for the test suite.

The 10-agent square scenario (quadratic node functions with the mixed alpha
weights below) is the standard benchmark configuration; the heavy runs are
cached at session scope.
"""

import math
import time

import numpy as np
import pytest

from hetcover import (
    AgentConfig,
    ControlLaw,
    ConvexPolygon,
    DensityField,
    NodeFunctionSpec,
    RunConfig,
    run_simulation,
)

ALPHAS_10 = (1.0, 1.25, 1.5, 0.75, 0.8, 1.3, 0.9, 1.1, 1.4, 1.2)
SEEDS_5 = (0, 1, 2, 3, 4)


def square(side=10.0) -> ConvexPolygon:
    return ConvexPolygon(((0.0, 0.0), (side, 0.0), (side, side), (0.0, side)))


def unit_square() -> ConvexPolygon:
    return square(1.0)


def gaussian_corner() -> DensityField:
    return DensityField.gaussian(0.9, 0.04, (10.0, 10.0))


def ten_agent_config(
    seed=0,
    density=None,
    law=None,
    cutoff_anchor=None,
    u_max=None,
    u_const=None,
    delta=0.1,
    **overrides,
):
    """Standard 10-agent benchmark on the 10x10 square.

    cutoff_anchor c sets per-agent range limits R_i = c / sqrt(alpha_i), which
    makes every cutoff effectiveness equal to -c**2.
    """
    agents = []
    for a in ALPHAS_10:
        rl = cutoff_anchor / math.sqrt(a) if cutoff_anchor is not None else None
        agents.append(
            AgentConfig(
                spec=NodeFunctionSpec("quadratic", alpha=a, range_limit=rl),
                u_max=u_max,
                u_const=u_const,
                delta=delta,
            )
        )
    return RunConfig(
        polygon=square(),
        density=density if density is not None else DensityField.uniform(1.0),
        agents=tuple(agents),
        control=law if law is not None else ControlLaw("proportional", 1.0),
        seed=seed,
        **overrides,
    )


def random_quadratic_config(rng, n, polygon=None, margin=0.6, separation=1.5):
    """Random interior positions and mixed quadratic weights for property tests.

    Positions keep a minimum pairwise separation: the finite-difference
    gradient check is calibrated for generic configurations, and near-coincident
    agents make the objective too curved for its default step.
    """
    poly = polygon if polygon is not None else square()
    xmin, ymin, xmax, ymax = poly.bounds
    positions = []
    while len(positions) < n:
        q = rng.uniform((xmin + margin, ymin + margin), (xmax - margin, ymax - margin))
        if not poly.contains_point(q, strict=True):
            continue
        if any((q[0] - p[0]) ** 2 + (q[1] - p[1]) ** 2 < separation**2 for p in positions):
            continue
        positions.append((float(q[0]), float(q[1])))
    alphas = rng.uniform(0.6, 1.6, size=n)
    specs = [NodeFunctionSpec("quadratic", alpha=float(a)) for a in alphas]
    return np.array(positions), specs


def timed_run(config):
    t0 = time.perf_counter()
    record = run_simulation(config)
    return record, time.perf_counter() - t0


@pytest.fixture(scope="session")
def scenario_a_runs():
    """Uniform-density benchmark across 5 seeds: {seed: (record, wall_seconds)}."""
    return {seed: timed_run(ten_agent_config(seed=seed)) for seed in SEEDS_5}


@pytest.fixture(scope="session")
def scenario_b_runs():
    """Gaussian-density benchmark across 5 seeds."""
    return {
        seed: timed_run(ten_agent_config(seed=seed, density=gaussian_corner()))
        for seed in SEEDS_5
    }
