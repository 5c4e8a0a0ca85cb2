"""Exact connectivity metrics for N uniform nodes on a square.

Every metric is an average over node position ``u`` of a function of the
clipped-disk area ``F(u)``. The average is taken cell by cell over the
subregion decomposition, so each integrand is a single smooth closed form.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln, xlog1py, xlogy

from .geometry import SQRT2
from .partition import subregions
from .quadrature import DEFAULT_SETTINGS, IntegrationSettings, QuadResult, integrate_cell


class OutOfRangeWarning(UserWarning):
    """An approximation left [0, 1] or a probability had to be clamped."""


@dataclass(frozen=True)
class NetworkModel:
    n_nodes: int
    r0: float
    side_length: float = 1.0

    def __post_init__(self):
        if int(self.n_nodes) != self.n_nodes or self.n_nodes < 1:
            raise ValueError(f"n_nodes must be a positive integer, got {self.n_nodes}")
        if not self.r0 >= 0:
            raise ValueError(f"r0 must be non-negative, got {self.r0}")
        if not self.side_length > 0:
            raise ValueError(f"side_length must be positive, got {self.side_length}")

    @property
    def range_unit(self) -> float:
        """Transmission range measured in side lengths."""
        return self.r0 / self.side_length

    @property
    def density(self) -> float:
        return self.n_nodes / self.side_length**2


@dataclass
class ConnectivityCurve:
    metric: str
    n_nodes: int
    source: str
    k: int | None = None
    samples: list[tuple[float, float]] = field(default_factory=list)
    ci_halfwidth: list[float] | None = None


def binomial_lower_tail(F, trials: int, k: int):
    """``P(Binomial(trials, F) <= k - 1)``, summed term by term in log space."""
    F = np.asarray(F, dtype=float)
    out = np.zeros_like(F)
    for d in range(min(k, trials + 1)):
        log_coef = gammaln(trials + 1) - gammaln(d + 1) - gammaln(trials - d + 1)
        out += np.exp(log_coef + xlogy(d, F) + xlog1py(trials - d, -F))
    return out


def average_over_square(g, r0: float, settings: IntegrationSettings = DEFAULT_SETTINGS) -> QuadResult:
    """``int over [0,1]^2 of g(F(u; r0)) du`` via the subregion decomposition."""
    total = QuadResult(0.0, 0.0, True)
    for spec in subregions(r0):
        if spec.fully_covered:
            piece = integrate_cell(lambda x, y: g(np.ones_like(x)), spec, settings)
        else:
            piece = integrate_cell(
                lambda x, y, s=spec: g(np.clip(s.coverage(x, y), 0.0, 1.0)), spec, settings)
        total = total + piece.scaled(spec.multiplicity)
    return total


def _lower_tail_average(model: NetworkModel, k: int, settings) -> QuadResult:
    n = int(model.n_nodes)
    r = model.range_unit
    if r >= SQRT2:
        return QuadResult(0.0, 0.0, True)
    return average_over_square(lambda F: binomial_lower_tail(F, n - 1, k), r, settings)


def p_isolation(model: NetworkModel, settings: IntegrationSettings = DEFAULT_SETTINGS,
                with_error: bool = False):
    """Probability that a given node has no neighbour."""
    if model.n_nodes == 1:
        res = QuadResult(1.0, 0.0, True)
    else:
        res = _lower_tail_average(model, 1, settings)
    value = min(max(res.value, 0.0), 1.0)
    return (value, res) if with_error else value


def min_degree_dist(model: NetworkModel, k: int, settings: IntegrationSettings = DEFAULT_SETTINGS,
                    with_error: bool = False):
    """Probability that every node has at least ``k`` neighbours.

    Nodes are treated as independent, so this is the per-node probability
    of degree ``>= k`` raised to the power N.
    """
    n = int(model.n_nodes)
    if int(k) != k or not 1 <= k <= n - 1:
        raise ValueError(f"k must satisfy 1 <= k <= N-1 = {n - 1}, got {k}")
    res = _lower_tail_average(model, int(k), settings)
    per_node = 1.0 - res.value
    if per_node < 0.0:
        warnings.warn(f"per-node probability {per_node:.3g} < 0 clamped", OutOfRangeWarning,
                      stacklevel=2)
        per_node = 0.0
    value = min(per_node, 1.0) ** n
    return (value, res) if with_error else value


def mean_degree(model: NetworkModel, settings: IntegrationSettings = DEFAULT_SETTINGS) -> float:
    """Expected number of neighbours of a node."""
    n = int(model.n_nodes)
    r = model.range_unit
    if n == 1 or r == 0.0:
        return 0.0
    if r >= SQRT2:
        return float(n - 1)
    return (n - 1) * average_over_square(lambda F: F, r, settings).value


def distance_cdf(r: float) -> float:
    """CDF of the distance between two uniform points in the unit square."""
    r = float(r)
    if r <= 0.0:
        return 0.0
    if r >= SQRT2:
        return 1.0
    if r <= 1.0:
        return math.pi * r * r - 8.0 / 3.0 * r**3 + 0.5 * r**4
    s = math.sqrt(r * r - 1.0)
    return (1.0 / 3.0 + (math.pi - 2.0) * r * r - 0.5 * r**4
            + 4.0 / 3.0 * (2.0 * r * r + 1.0) * s
            - 4.0 * r * r * math.acos(1.0 / r))


def poisson_isolation(density: float, r0: float) -> float:
    """Isolation probability in an infinite Poisson field of given density."""
    if density < 0:
        raise ValueError("density must be non-negative")
    return math.exp(-density * math.pi * r0 * r0)


def hd_approx_connectivity(model: NetworkModel) -> tuple[float, bool]:
    """High-density cluster-expansion estimate of the 1-connectivity probability.

    Returns ``(value, in_range)``; the value is not clamped, and
    ``in_range`` is False when it falls outside [0, 1].
    """
    L = model.side_length
    rho = model.density
    if model.r0 <= 0.0:
        return -math.inf, False
    beta = (model.r0 / L) ** -2
    value = (1.0
             - L * L * rho * math.exp(-math.pi * rho / beta)
             - 4.0 * L * math.sqrt(beta / math.pi) * math.exp(-math.pi * rho / (2.0 * beta))
             - 16.0 * beta / (rho * math.pi) * math.exp(-math.pi * rho / (4.0 * beta)))
    return value, 0.0 <= value <= 1.0
