"""Coverage control for heterogeneous mobile sensor networks.

Sensors with unequal (and possibly range-limited or anisotropic) sensing
effectiveness are deployed in a convex planar domain by repeatedly computing
a generalized Voronoi partition on a raster grid, the mass and centroid of
each cell under an effective density, and a centroid-seeking control law.
"""

from .config import AgentConfig, RunConfig, config_from_dict, config_to_dict, load_config, save_config
from .control import (
    AgentState,
    ControlLaw,
    compute_controls,
    control_constant_speed,
    control_limited_range,
    control_proportional,
    control_saturated,
    step,
    terminated,
)
from .domain import (
    ConvexPolygon,
    DensityField,
    Grid,
    build_grid,
    density_at,
    density_values,
    integrate,
    load_sampled_density,
)
from .errors import DomainError, SingularityError, ValidationError
from .node_functions import (
    Metric2x2,
    NodeFunctionSpec,
    check_cutoff_equality,
    effectiveness,
    effectiveness_slope_sq,
    rim_shifted,
    validate_decreasing,
)
from .objective import (
    CellMoments,
    FdGradient,
    analytic_gradient,
    cell_moments,
    coverage_objective,
    coverage_objective_limited,
    effective_density,
    finite_difference_gradient,
)
from .partition import (
    NeighborGraph,
    PartitionLabels,
    assign,
    assign_limited,
    cell_mask,
    neighbor_graph,
    save_labels,
)
from .plots import render_figure
from .sim import (
    DistributednessReport,
    SimRecord,
    export_record,
    load_record,
    run_simulation,
    verify_distributedness,
)

__version__ = "0.1.0"

__all__ = [
    "AgentConfig",
    "AgentState",
    "CellMoments",
    "ControlLaw",
    "ConvexPolygon",
    "DensityField",
    "DistributednessReport",
    "DomainError",
    "FdGradient",
    "Grid",
    "Metric2x2",
    "NeighborGraph",
    "NodeFunctionSpec",
    "PartitionLabels",
    "RunConfig",
    "SimRecord",
    "SingularityError",
    "ValidationError",
    "analytic_gradient",
    "assign",
    "assign_limited",
    "build_grid",
    "cell_mask",
    "cell_moments",
    "check_cutoff_equality",
    "compute_controls",
    "config_from_dict",
    "config_to_dict",
    "control_constant_speed",
    "control_limited_range",
    "control_proportional",
    "control_saturated",
    "coverage_objective",
    "coverage_objective_limited",
    "density_at",
    "density_values",
    "effective_density",
    "effectiveness",
    "effectiveness_slope_sq",
    "export_record",
    "finite_difference_gradient",
    "integrate",
    "load_config",
    "load_record",
    "load_sampled_density",
    "neighbor_graph",
    "render_figure",
    "rim_shifted",
    "run_simulation",
    "save_config",
    "save_labels",
    "step",
    "terminated",
    "validate_decreasing",
    "verify_distributedness",
]
