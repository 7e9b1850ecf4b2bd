import math

import numpy as np
import pytest

from realspec.ensemble import EnsembleSpec, rng_stream
from realspec.montecarlo import (
    MCConfig,
    MCResult,
    _classify_schur,
    count_real_eigenvalues,
    estimate_p,
    sample_product,
)


def test_sample_product_m1_moments():
    spec = EnsembleSpec(3, 1)
    rng = rng_stream(11, 0)
    draws = np.array([sample_product(spec, rng) for _ in range(100_000 // 9 + 1)]).ravel()
    n = draws.size
    assert abs(draws.mean()) < 4 / math.sqrt(n)
    assert abs(draws.var() - 1) < 4 * math.sqrt(2 / n)


def test_sample_product_m2_frobenius_moment():
    # E ||X2 X1||_F^2 = N^3
    spec = EnsembleSpec(2, 2)
    rng = rng_stream(5, 0)
    vals = np.array([np.sum(sample_product(spec, rng) ** 2) for _ in range(40_000)])
    assert abs(vals.mean() - 8) < 4 * vals.std() / math.sqrt(vals.size)


def test_count_trivial_matrices():
    assert count_real_eigenvalues(np.eye(3)) == 3
    assert count_real_eigenvalues(np.array([[0.0, -1.0], [1.0, 0.0]])) == 0
    assert count_real_eigenvalues(np.diag([1.0, 2.0])) == 2


def test_count_rejects_nonfinite():
    with pytest.raises(ValueError):
        count_real_eigenvalues(np.array([[np.nan, 0], [0, 1.0]]))


def test_borderline_block_counts_as_real():
    # standardized block with discriminant just below zero, within tolerance
    T = np.array([[1.0, 1.0], [-1e-12, 1.0]])
    assert _classify_schur(T, (1e-9,)) == [2]
    assert _classify_schur(T, (1e-14,)) == [0]


def test_count_scale_invariant_and_parity():
    rng = np.random.default_rng(2)
    for _ in range(100):
        M = rng.standard_normal((5, 5)) @ rng.standard_normal((5, 5))
        k = count_real_eigenvalues(M)
        assert k % 2 == 1
        assert count_real_eigenvalues(3.7 * M) == k
        assert count_real_eigenvalues(1e-3 * M) == k


def _check_result(res: MCResult):
    assert sum(res.counts.values()) == res.trials
    assert all((k - res.spec.N) % 2 == 0 for k in res.counts)
    assert abs(sum(res.p_hat.values()) - 1) < 1e-12
    assert all(0 <= p <= 1 for p in res.p_hat.values())


@pytest.mark.parametrize("N,m,ref", [
    (2, 2, math.pi / 4),
    (2, 1, 1 / math.sqrt(2)),
    (4, 2, 201 * math.pi**2 / 2**13),
])
def test_estimate_matches_exact(N, m, ref):
    res = estimate_p(MCConfig(EnsembleSpec(N, m), 100_000, seed=2024, workers=2))
    _check_result(res)
    assert abs(res.estimate(N) - ref) < 4 * res.standard_error(N)


def test_histogram_invariant_to_worker_count():
    spec = EnsembleSpec(3, 2)
    a = estimate_p(MCConfig(spec, 12_000, seed=99, workers=1))
    b = estimate_p(MCConfig(spec, 12_000, seed=99, workers=3))
    assert a.counts == b.counts
    c = estimate_p(MCConfig(spec, 12_000, seed=100, workers=1))
    assert c.counts != a.counts


def test_sensitivity_within_three_sigma():
    res = estimate_p(MCConfig(EnsembleSpec(4, 3), 20_000, seed=1))
    assert res.sensitivity_shift < 3
    for hist in res.sensitivity.values():
        for k, count in hist.items():
            p = count / res.trials
            assert abs(p - res.estimate(k)) <= 3 * max(res.standard_error(k), 1 / res.trials)


def test_confidence_interval():
    res = estimate_p(MCConfig(EnsembleSpec(2, 1), 5_000, seed=3))
    lo, hi = res.confidence_interval(2)
    assert lo < res.estimate(2) < hi
    assert res.p_hat.keys() == res.stderr.keys()


def test_config_validation():
    spec = EnsembleSpec(2, 2)
    with pytest.raises(ValueError):
        MCConfig(spec, 0)
    with pytest.raises(ValueError):
        MCConfig(spec, 10, seed=-1)
    with pytest.raises(ValueError):
        MCConfig(spec, 10, workers=0)
