"""Exact connectivity metrics for finite wireless networks on a square.

N nodes are placed uniformly at random in a square, and two nodes are
neighbours when they lie within range ``r0`` of each other. Disks near the
border are clipped by the square, which changes the node-degree statistics.
This package evaluates the clipped-disk area in closed form, averages
functions of it exactly over a piecewise-smooth decomposition of the square,
and checks the results against a seeded Monte-Carlo simulator.
"""

from .design import DesignQuery, UnsatisfiableQuery, critical_nodes, critical_range
from .geometry import BoundaryEffects, Point, classify, coverage_cdf
from .metrics import (
    ConnectivityCurve,
    NetworkModel,
    OutOfRangeWarning,
    distance_cdf,
    hd_approx_connectivity,
    mean_degree,
    min_degree_dist,
    p_isolation,
    poisson_isolation,
)
from .partition import RangeCase, SubregionSpec, range_case, subregion_area, subregions
from .quadrature import IntegrationSettings, QuadratureWarning, QuadResult, integrate_cell
from .simulator import (
    GraphSample,
    SimulationConfig,
    SimulationResult,
    estimate_isolation,
    estimate_kcon,
    estimate_min_degree,
    is_k_connected,
    sample_graph,
    simulate_sweep,
)

__version__ = "0.1.0"
