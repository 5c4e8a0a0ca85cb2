import math
import warnings

import numpy as np
import pytest
from scipy.integrate import cubature

from finitenet.geometry import coverage_cdf
from finitenet.metrics import (
    NetworkModel, binomial_lower_tail, distance_cdf, hd_approx_connectivity, mean_degree,
    min_degree_dist, p_isolation, poisson_isolation,
)
from finitenet.simulator import SimulationConfig, estimate_isolation, estimate_min_degree
from oracles import square_line_picking_cdf


def test_model_validation():
    with pytest.raises(ValueError):
        NetworkModel(0, 0.1)
    with pytest.raises(ValueError):
        NetworkModel(5, -0.1)
    with pytest.raises(ValueError):
        NetworkModel(5, 0.1, side_length=0)
    assert NetworkModel(5, 2.0, side_length=4).range_unit == 0.5


def test_isolation_trivial():
    assert p_isolation(NetworkModel(1, 0.3)) == 1.0
    assert p_isolation(NetworkModel(10, 1.5)) == 0.0
    assert p_isolation(NetworkModel(10, 0.0)) == 1.0


def test_isolation_side_length_scaling():
    assert p_isolation(NetworkModel(10, 0.4, side_length=2.0)) == pytest.approx(
        p_isolation(NetworkModel(10, 0.2)), abs=1e-15)


def test_min_degree_trivial():
    for k in (1, 2, 4):
        assert min_degree_dist(NetworkModel(5, 1.5), k) == 1.0
    assert min_degree_dist(NetworkModel(5, 0.0), 1) == 0.0


def test_min_degree_rejects_bad_k():
    with pytest.raises(ValueError):
        min_degree_dist(NetworkModel(5, 0.3), 5)
    with pytest.raises(ValueError):
        min_degree_dist(NetworkModel(5, 0.3), 0)


@pytest.mark.parametrize("n", [2, 10, 50])
@pytest.mark.parametrize("r0", [0.05, 0.3, 0.55, 0.8, 1.2])
def test_isolation_identity(n, r0):
    m = NetworkModel(n, r0)
    assert min_degree_dist(m, 1) == pytest.approx((1 - p_isolation(m)) ** n, abs=1e-12)


def test_mean_degree_examples():
    assert mean_degree(NetworkModel(5, 1.5)) == 4.0
    assert mean_degree(NetworkModel(2, 0.0)) == 0.0
    expected = math.pi * 0.25 - 8 / 3 * 0.125 + 0.5 * 0.0625  # 0.483315
    assert mean_degree(NetworkModel(2, 0.5)) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("r", [0.1, 0.5, 0.9, 1.0, 1.1, 1.3, 1.41])
def test_distance_cdf_closed_form(r):
    assert distance_cdf(r) == pytest.approx(square_line_picking_cdf(r), abs=1e-12)
    assert mean_degree(NetworkModel(2, r)) == pytest.approx(distance_cdf(r), abs=1e-10)


def test_distance_cdf_matches_sampling():
    rng = np.random.default_rng(2)
    n = 10**6
    d = np.hypot(*(rng.random((2, n)) - rng.random((2, n))))
    p = distance_cdf(0.5)
    assert abs(np.mean(d <= 0.5) - p) < 4 * math.sqrt(p * (1 - p) / n)


def test_binomial_tail():
    from scipy.stats import binom
    F = np.linspace(0, 1, 11)
    for k in (1, 2, 5):
        assert np.allclose(binomial_lower_tail(F, 20, k), binom.cdf(k - 1, 20, F), atol=1e-14)
    # large trial counts stay finite
    assert np.isfinite(binomial_lower_tail(np.array([0.01]), 10**4, 3)).all()


@pytest.mark.parametrize("n, r0", [(10, 0.2), (20, 0.45), (50, 0.15), (10, 0.8)])
def test_isolation_against_unpartitioned_integral(n, r0):
    # adaptive cubature straight over the square; only the straight lines where
    # side terms switch on are used as block edges, the curved cell edges are not
    def f(pts):
        return (1.0 - coverage_cdf((pts[:, 0], pts[:, 1]), r0)) ** (n - 1)

    cuts = sorted({0.0, 1.0, min(r0, 1.0), max(1.0 - r0, 0.0)})
    total = 0.0
    for x0, x1 in zip(cuts[:-1], cuts[1:]):
        for y0, y1 in zip(cuts[:-1], cuts[1:]):
            res = cubature(f, [x0, y0], [x1, y1], rtol=1e-11, atol=1e-12, max_subdivisions=100_000)
            assert res.status == "converged"
            total += res.estimate
    assert p_isolation(NetworkModel(n, r0)) == pytest.approx(total, abs=1e-7)


def test_monotonicity():
    rs = np.linspace(0.05, 1.0, 12)
    for n in (10, 30):
        iso = [p_isolation(NetworkModel(n, r)) for r in rs]
        assert all(b <= a + 1e-12 for a, b in zip(iso, iso[1:]))
        for k in (1, 2):
            fd = [min_degree_dist(NetworkModel(n, r), k) for r in rs]
            assert all(b >= a - 1e-12 for a, b in zip(fd, fd[1:]))
    for r in (0.2, 0.4):
        assert p_isolation(NetworkModel(20, r)) <= p_isolation(NetworkModel(10, r))
        vals = [min_degree_dist(NetworkModel(20, r), k) for k in (1, 2, 3)]
        assert vals == sorted(vals, reverse=True)


def test_poisson_examples():
    assert poisson_isolation(0, 0.3) == 1.0
    assert poisson_isolation(10, 0.1) == pytest.approx(math.exp(-0.1 * math.pi))
    assert poisson_isolation(50, 0.2) == pytest.approx(0.001867, abs=1e-6)
    with pytest.raises(ValueError):
        poisson_isolation(-1, 0.1)


def test_finite_isolation_exceeds_poisson():
    for n in (10, 50):
        for r in (0.05, 0.2, 0.4):
            assert p_isolation(NetworkModel(n, r)) >= poisson_isolation(n, r)


def test_hd_approximation():
    v, ok = hd_approx_connectivity(NetworkModel(10**5, 0.1))
    assert ok and v == pytest.approx(1.0, abs=1e-12)
    v, ok = hd_approx_connectivity(NetworkModel(10, 1e-3))
    assert not ok and v < 0
    v, ok = hd_approx_connectivity(NetworkModel(50, 0.3))
    beta = 0.3**-2
    expected = (1 - 50 * math.exp(-math.pi * 50 / beta)
                - 4 * math.sqrt(beta / math.pi) * math.exp(-math.pi * 50 / (2 * beta))
                - 16 * beta / (50 * math.pi) * math.exp(-math.pi * 50 / (4 * beta)))
    assert v == pytest.approx(expected, rel=1e-14)


def test_isolation_matches_simulation():
    analytic = p_isolation(NetworkModel(10, 0.2))
    sim = estimate_isolation(SimulationConfig(10, 0.2, runs=50_000, seed=1))
    assert abs(sim.p_iso_hat - analytic) <= 3 * sim.p_iso_stderr


def test_min_degree_matches_simulation():
    analytic = min_degree_dist(NetworkModel(20, 0.3), 2)
    sim = estimate_min_degree(SimulationConfig(20, 0.3, runs=50_000, seed=2), [2])
    assert abs(sim.min_degree_freq[2] - analytic) <= 3 * sim.min_degree_stderr[2]


def test_error_estimate_returned():
    v, res = p_isolation(NetworkModel(10, 0.3), with_error=True)
    assert res.converged and res.error < 1e-8 and v == pytest.approx(res.value)
