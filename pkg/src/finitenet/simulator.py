"""Monte-Carlo random geometric graphs on a square.

Run ``i`` of a configuration draws its node positions from a Philox stream
keyed by the seed with ``i`` in the high counter word, so every run is
reproducible on its own and runs can be computed in any order or in
parallel. Positions do not depend on ``r0``; :func:`simulate_sweep` reuses
one set of sampled networks for a whole grid of ranges.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numba
import numpy as np

DEFAULT_RUNS = 50_000

# cap on B * N * N booleans held at once while building adjacency
_CHUNK_ELEMENTS = 4_000_000


@dataclass(frozen=True)
class SimulationConfig:
    n_nodes: int
    r0: float
    runs: int = DEFAULT_RUNS
    seed: int = 0
    side_length: float = 1.0

    def __post_init__(self):
        if int(self.n_nodes) != self.n_nodes or self.n_nodes < 1:
            raise ValueError(f"n_nodes must be a positive integer, got {self.n_nodes}")
        if int(self.runs) != self.runs or self.runs < 1:
            raise ValueError(f"runs must be a positive integer, got {self.runs}")
        if not self.r0 >= 0:
            raise ValueError(f"r0 must be non-negative, got {self.r0}")
        if not self.side_length > 0:
            raise ValueError("side_length must be positive")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")


@dataclass(frozen=True)
class GraphSample:
    positions: np.ndarray
    adjacency: np.ndarray

    @property
    def n_nodes(self) -> int:
        return self.adjacency.shape[0]

    @property
    def degree_list(self) -> np.ndarray:
        return self.adjacency.sum(axis=1)


def _stderr(p: float, runs: int) -> float:
    return math.sqrt(max(p * (1.0 - p), 0.0) / runs)


@dataclass
class SimulationResult:
    n_nodes: int
    r0: float
    runs_used: int
    p_iso_hat: float | None = None
    p_iso_stderr: float | None = None
    min_degree_freq: dict[int, float] = field(default_factory=dict)
    min_degree_stderr: dict[int, float] = field(default_factory=dict)
    p_kcon_hat: dict[int, float] = field(default_factory=dict)
    p_kcon_stderr: dict[int, float] = field(default_factory=dict)


def run_positions(n_nodes: int, seed: int, run_index: int, side_length: float = 1.0) -> np.ndarray:
    """Node positions of one run, shape ``(n_nodes, 2)``."""
    bitgen = np.random.Philox(key=int(seed), counter=[0, 0, int(run_index), 0])
    return np.random.Generator(bitgen).random((n_nodes, 2)) * side_length


def _positions_batch(config: SimulationConfig, start: int, stop: int) -> np.ndarray:
    out = np.empty((stop - start, config.n_nodes, 2))
    for i in range(start, stop):
        out[i - start] = run_positions(config.n_nodes, config.seed, i, config.side_length)
    return out


def _sq_distances(pos: np.ndarray) -> np.ndarray:
    diff = pos[..., :, None, :] - pos[..., None, :, :]
    return np.einsum("...ijk,...ijk->...ij", diff, diff)


def _adjacency(d2: np.ndarray, r0: float) -> np.ndarray:
    adj = d2 <= r0 * r0
    n = adj.shape[-1]
    idx = np.arange(n)
    adj[..., idx, idx] = False
    return adj


def sample_graph(config: SimulationConfig, run_index: int) -> GraphSample:
    """The geometric graph of run ``run_index``; nodes adjacent iff distance <= r0."""
    pos = run_positions(config.n_nodes, config.seed, run_index, config.side_length)
    return GraphSample(pos, _adjacency(_sq_distances(pos), config.r0))


# --- k-connectivity ---------------------------------------------------------

@numba.njit(cache=True)
def _pack(adj):
    n = adj.shape[0]
    w = (n + 63) // 64
    words = np.zeros((n, w), dtype=np.uint64)
    for i in range(n):
        for j in range(n):
            if adj[i, j]:
                words[i, j >> 6] |= np.uint64(1) << np.uint64(j & 63)
    return words


@numba.njit(cache=True)
def _connected_without(words, n, removed, full):
    """Is the graph connected after deleting the vertices set in ``removed``?

    ``full`` has the bits of all ``n`` vertices set.
    """
    w = words.shape[1]
    target = np.empty(w, dtype=np.uint64)
    for j in range(w):
        target[j] = full[j] & ~removed[j]
    start = -1
    for v in range(n):
        if (target[v >> 6] >> np.uint64(v & 63)) & np.uint64(1):
            start = v
            break
    if start < 0:
        return True
    reach = np.zeros(w, dtype=np.uint64)
    done = np.zeros(w, dtype=np.uint64)
    reach[start >> 6] |= np.uint64(1) << np.uint64(start & 63)
    changed = True
    while changed:
        changed = False
        for v in range(n):
            wi = v >> 6
            bit = np.uint64(1) << np.uint64(v & 63)
            if (reach[wi] & bit) and not (done[wi] & bit):
                done[wi] |= bit
                grew = False
                for j in range(w):
                    new = words[v, j] & target[j] & ~reach[j]
                    if new:
                        reach[j] |= new
                        grew = True
                if grew:
                    changed = True
                    complete = True
                    for j in range(w):
                        if reach[j] != target[j]:
                            complete = False
                            break
                    if complete:
                        return True
    for j in range(w):
        if reach[j] != target[j]:
            return False
    return True


@numba.njit(cache=True)
def _all_removals_connected(words, n, size):
    """True iff deleting every ``size``-subset of vertices leaves a connected graph."""
    w = words.shape[1]
    removed = np.zeros(w, dtype=np.uint64)
    full = np.zeros(w, dtype=np.uint64)
    for v in range(n):
        full[v >> 6] |= np.uint64(1) << np.uint64(v & 63)
    if size == 0:
        return _connected_without(words, n, removed, full)
    idx = np.arange(size)
    while True:
        removed[:] = 0
        for t in range(size):
            removed[idx[t] >> 6] |= np.uint64(1) << np.uint64(idx[t] & 63)
        if not _connected_without(words, n, removed, full):
            return False
        # next combination in lexicographic order
        t = size - 1
        while t >= 0 and idx[t] == n - size + t:
            t -= 1
        if t < 0:
            return True
        idx[t] += 1
        for s in range(t + 1, size):
            idx[s] = idx[s - 1] + 1


@numba.njit(cache=True)
def _kcon_levels(adj, kmax):
    """Largest k <= kmax (capped at n-1) such that the graph is k-connected."""
    n = adj.shape[0]
    words = _pack(adj)
    mindeg = n
    for i in range(n):
        d = 0
        for j in range(n):
            if adj[i, j]:
                d += 1
        if d < mindeg:
            mindeg = d
    level = 0
    for k in range(1, min(kmax, n - 1) + 1):
        if mindeg < k:
            break
        # sizes below k-1 were covered while establishing level k-1
        if not _all_removals_connected(words, n, k - 1):
            break
        level = k
    return level


@numba.njit(cache=True)
def _kcon_levels_batch(adj, kmax):
    out = np.zeros(adj.shape[0], dtype=np.int64)
    for b in range(adj.shape[0]):
        out[b] = _kcon_levels(adj[b], kmax)
    return out


def is_k_connected(g: GraphSample, k: int) -> bool:
    """Whether the graph survives deletion of any ``k - 1`` vertices connected.

    Checks every vertex subset of size ``< k`` by brute force, which is
    ``O(N^(k-1))`` connectivity tests; intended for small ``k``.
    """
    n = g.n_nodes
    if int(k) != k or k < 1:
        raise ValueError(f"k must be a positive integer, got {k}")
    if n < 2:
        raise ValueError("k-connectivity needs at least two nodes")
    if k >= n:
        raise ValueError(f"a graph on {n} nodes cannot be {k}-connected")
    adj = np.ascontiguousarray(g.adjacency, dtype=np.bool_)
    return bool(_kcon_levels(adj, int(k)) >= k)


# --- estimators -------------------------------------------------------------

def _check_ks(ks, n):
    ks = sorted({int(k) for k in ks})
    for k in ks:
        if not 1 <= k <= n - 1:
            raise ValueError(f"k must satisfy 1 <= k <= N-1 = {n - 1}, got {k}")
    return ks


def simulate_sweep(n_nodes: int, r0_values, runs: int = DEFAULT_RUNS, seed: int = 0,
                   side_length: float = 1.0, min_degree_ks=(), kcon_ks=(),
                   isolation: bool = True) -> list[SimulationResult]:
    """Estimate all requested quantities for each ``r0`` on one set of runs.

    Counts are accumulated as integers per chunk of runs, so the result is
    independent of chunking and evaluation order.
    """
    r0_values = [float(r) for r in r0_values]
    cfg = SimulationConfig(n_nodes, r0_values[0] if r0_values else 0.0, runs, seed, side_length)
    n = cfg.n_nodes
    md_ks = _check_ks(min_degree_ks, n) if min_degree_ks else []
    kc_ks = _check_ks(kcon_ks, n) if kcon_ks else []
    kmax = max(kc_ks) if kc_ks else 0

    iso = np.zeros(len(r0_values), dtype=np.int64)
    md = np.zeros((len(r0_values), len(md_ks)), dtype=np.int64)
    kc = np.zeros((len(r0_values), len(kc_ks)), dtype=np.int64)
    md_arr = np.array(md_ks, dtype=np.int64)
    kc_arr = np.array(kc_ks, dtype=np.int64)

    chunk = max(1, _CHUNK_ELEMENTS // (n * n))
    for start in range(0, runs, chunk):
        stop = min(runs, start + chunk)
        d2 = _sq_distances(_positions_batch(cfg, start, stop))
        for ri, r0 in enumerate(r0_values):
            adj = _adjacency(d2, r0)
            deg = adj.sum(axis=2)
            if isolation:
                iso[ri] += int((deg == 0).sum())
            if md_ks:
                mind = deg.min(axis=1)
                md[ri] += (mind[:, None] >= md_arr[None, :]).sum(axis=0)
            if kc_ks:
                levels = _kcon_levels_batch(adj, kmax)
                kc[ri] += (levels[:, None] >= kc_arr[None, :]).sum(axis=0)

    results = []
    for ri, r0 in enumerate(r0_values):
        res = SimulationResult(n, r0, runs)
        if isolation:
            p = 1.0 if n == 1 else float(iso[ri] / (runs * n))
            res.p_iso_hat = p
            res.p_iso_stderr = _stderr(p, runs)
        for j, k in enumerate(md_ks):
            p = float(md[ri, j] / runs)
            res.min_degree_freq[k] = p
            res.min_degree_stderr[k] = _stderr(p, runs)
        for j, k in enumerate(kc_ks):
            p = float(kc[ri, j] / runs)
            res.p_kcon_hat[k] = p
            res.p_kcon_stderr[k] = _stderr(p, runs)
        results.append(res)
    return results


def estimate_isolation(config: SimulationConfig) -> SimulationResult:
    """Fraction of all (run, node) draws that are isolated."""
    return simulate_sweep(config.n_nodes, [config.r0], config.runs, config.seed,
                          config.side_length)[0]


def estimate_min_degree(config: SimulationConfig, ks) -> SimulationResult:
    """Fraction of runs whose minimum degree is at least ``k``, per ``k``."""
    return simulate_sweep(config.n_nodes, [config.r0], config.runs, config.seed,
                          config.side_length, min_degree_ks=ks, isolation=False)[0]


def estimate_kcon(config: SimulationConfig, ks) -> SimulationResult:
    """Fraction of runs whose graph is k-connected, per ``k``."""
    return simulate_sweep(config.n_nodes, [config.r0], config.runs, config.seed,
                          config.side_length, kcon_ks=ks, isolation=False)[0]
