"""Critical transmission range and critical node count.

Both solvers treat the minimum-degree probability as a monotone function of
the free parameter and bracket the smallest value that reaches the target.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .metrics import NetworkModel, min_degree_dist
from .quadrature import DEFAULT_SETTINGS, IntegrationSettings

MAX_NODES = 1_000_000


class UnsatisfiableQuery(ValueError):
    """No parameter value reaches the requested probability."""


@dataclass(frozen=True)
class DesignQuery:
    target: float
    k: int = 1
    n_nodes: int | None = None
    r0: float | None = None
    tolerance: float = 1e-5
    side_length: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.target < 1.0:
            raise ValueError(f"target must lie in (0, 1), got {self.target}")
        if int(self.k) != self.k or self.k < 1:
            raise ValueError(f"k must be a positive integer, got {self.k}")
        if (self.n_nodes is None) == (self.r0 is None):
            raise ValueError("fix exactly one of n_nodes and r0")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")


def critical_range(n_nodes: int, k: int, target: float, tolerance: float = 1e-5,
                   side_length: float = 1.0,
                   settings: IntegrationSettings = DEFAULT_SETTINGS) -> float:
    """Smallest ``r0`` with ``min_degree_dist(N, r0, k) >= target``.

    The returned value is the upper end of the final bisection bracket, so
    the target is always met there and the true root lies within
    ``tolerance`` below it.
    """
    DesignQuery(target, k, n_nodes=n_nodes, tolerance=tolerance)
    if n_nodes <= k:
        raise ValueError(f"need N >= k + 1, got N={n_nodes}, k={k}")

    def prob(r):
        return min_degree_dist(NetworkModel(n_nodes, r, side_length), k, settings)

    lo, hi = 0.0, math.sqrt(2.0) * side_length
    while hi - lo > tolerance:
        mid = 0.5 * (lo + hi)
        if prob(mid) >= target:
            hi = mid
        else:
            lo = mid
    return hi


def critical_nodes(r0: float, k: int, target: float, side_length: float = 1.0,
                   settings: IntegrationSettings = DEFAULT_SETTINGS,
                   max_nodes: int = MAX_NODES) -> int:
    """Smallest ``N`` with ``min_degree_dist(N, r0, k) >= target``."""
    DesignQuery(target, k, r0=r0)
    if not r0 > 0:
        raise UnsatisfiableQuery("r0 = 0 leaves every node isolated")

    def ok(n):
        return min_degree_dist(NetworkModel(n, r0, side_length), k, settings) >= target

    lo = k + 1
    if ok(lo):
        return lo
    hi = lo
    while not ok(hi):
        lo = hi
        hi *= 2
        if hi > max_nodes:
            raise UnsatisfiableQuery(f"target {target} not reached with up to {max_nodes} nodes")
    # invariant: not ok(lo), ok(hi)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi
