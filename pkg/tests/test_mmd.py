import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from divsat import (
    MEDIAN_HEURISTIC,
    DimensionMismatch,
    EmbeddingSet,
    InvalidRepetitions,
    KernelConfig,
    SizeMismatch,
    gaussian_kernel,
    median_heuristic,
    mmd,
    mmd_calculator,
    resolve_bandwidth,
)


def as_set(rows, prefix=""):
    return EmbeddingSet.from_array(np.asarray(rows, dtype=np.float64), id_prefix=prefix)


def oracle_kernel(x, y, bw):
    d2 = sum((a - b) ** 2 for a, b in zip(x, y))
    return math.exp(-d2 / (2.0 * bw * bw))


def oracle_mmd(X, Y, bw):
    """Triple-loop normalized V-statistic, diagonals included."""
    n = len(X)
    m = len(Y)
    xx = sum(oracle_kernel(a, b, bw) for a in X for b in X) / (n * n)
    yy = sum(oracle_kernel(a, b, bw) for a in Y for b in Y) / (m * m)
    xy = sum(oracle_kernel(a, b, bw) for a in X for b in Y) / (n * m)
    return xx + yy - 2.0 * xy


def oracle_median(rows):
    dists = []
    for i in range(len(rows)):
        for j in range(i + 1, len(rows)):
            d = math.dist(rows[i], rows[j])
            if d > 0:
                dists.append(d)
    if not dists:
        return 1.0
    dists.sort()
    mid = len(dists) // 2
    if len(dists) % 2:
        return dists[mid]
    return 0.5 * (dists[mid - 1] + dists[mid])


class TestKernel:
    def test_self_kernel_is_one(self):
        v = np.array([3.0, -1.0, 2.0])
        assert gaussian_kernel(v, v, 0.7) == 1.0

    def test_frozen_value(self):
        got = gaussian_kernel(np.array([0.0, 0.0]), np.array([0.0, 2.0]), 1.0)
        assert got == pytest.approx(math.exp(-2.0), abs=1e-15)

    def test_matches_oracle(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            x = rng.normal(size=5)
            y = rng.normal(size=5)
            bw = float(rng.uniform(0.1, 3.0))
            assert gaussian_kernel(x, y, bw) == pytest.approx(
                oracle_kernel(x, y, bw), abs=1e-12
            )

    def test_dimension_checked(self):
        with pytest.raises(DimensionMismatch):
            gaussian_kernel(np.array([1.0]), np.array([1.0, 2.0]), 1.0)

    def test_range(self):
        rng = np.random.default_rng(3)
        for _ in range(30):
            k = gaussian_kernel(rng.normal(size=4), rng.normal(size=4), 0.5)
            assert 0.0 < k <= 1.0


class TestMedianHeuristic:
    def test_single_pair(self):
        assert median_heuristic(as_set([[0.0, 0.0]]), as_set([[0.0, 2.0]], prefix="y")) == 2.0

    def test_identical_pool_fallback(self):
        s = as_set([[1.0, 1.0]] * 3)
        t = as_set([[1.0, 1.0]] * 2, prefix="y")
        assert median_heuristic(s, t) == 1.0

    def test_matches_sort_oracle(self):
        rng = np.random.default_rng(5)
        rows = rng.normal(size=(20, 3)).tolist()
        x = as_set(rows[:8])
        y = as_set(rows[8:], prefix="y")
        assert median_heuristic(x, y) == pytest.approx(oracle_median(rows), abs=1e-12)

    def test_resolve_bandwidth(self):
        x = as_set([[0.0, 0.0]])
        y = as_set([[0.0, 2.0]], prefix="y")
        assert resolve_bandwidth(KernelConfig(bandwidth=0.25), x, y) == 0.25
        assert resolve_bandwidth(KernelConfig(bandwidth=MEDIAN_HEURISTIC), x, y) == 2.0

    def test_kernel_config_validation(self):
        with pytest.raises(ValueError):
            KernelConfig(bandwidth=0.0)
        with pytest.raises(ValueError):
            KernelConfig(bandwidth=-1.0)
        with pytest.raises(ValueError):
            KernelConfig(bandwidth="nonsense")


class TestMmd:
    def test_self_is_exact_zero(self):
        rng = np.random.default_rng(9)
        x = as_set(rng.normal(size=(17, 4)))
        assert mmd(x, x, KernelConfig(bandwidth=0.8)) == 0.0

    def test_frozen_singletons(self):
        x = as_set([[0.0, 0.0]])
        y = as_set([[0.0, 2.0]], prefix="y")
        got = mmd(x, y, KernelConfig(bandwidth=1.0))
        assert got == pytest.approx(2.0 - 2.0 * math.exp(-2.0), abs=1e-12)

    def test_matches_triple_loop_oracle(self):
        rng = np.random.default_rng(13)
        for _ in range(8):
            rows_x = rng.normal(size=(25, 8)).tolist()
            rows_y = (rng.normal(size=(25, 8)) + 0.3).tolist()
            x = as_set(rows_x)
            y = as_set(rows_y, prefix="y")
            bw = float(rng.uniform(0.5, 2.5))
            got = mmd(x, y, KernelConfig(bandwidth=bw))
            assert got == pytest.approx(oracle_mmd(rows_x, rows_y, bw), rel=1e-9, abs=1e-12)

    def test_symmetry_bit_exact(self):
        rng = np.random.default_rng(21)
        x = as_set(rng.normal(size=(12, 3)))
        y = as_set(rng.normal(size=(12, 3)) + 1.0, prefix="y")
        cfg = KernelConfig(bandwidth=1.3)
        assert mmd(x, y, cfg) == mmd(y, x, cfg)

    def test_size_mismatch_hints_at_calculator(self):
        x = as_set([[0.0]] * 3)
        y = as_set([[1.0]] * 4, prefix="y")
        with pytest.raises(SizeMismatch) as ei:
            mmd(x, y, KernelConfig(bandwidth=1.0))
        assert "mmd_calculator" in str(ei.value)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            mmd(as_set([[0.0]]), as_set([[0.0, 1.0]], prefix="y"), KernelConfig(bandwidth=1.0))

    def test_unnormalized_scales_by_n_squared(self):
        rng = np.random.default_rng(4)
        x = as_set(rng.normal(size=(9, 2)))
        y = as_set(rng.normal(size=(9, 2)) + 0.5, prefix="y")
        cfg = KernelConfig(bandwidth=1.0)
        norm = mmd(x, y, cfg)
        raw = mmd(x, y, cfg, normalized=False)
        assert raw == pytest.approx(norm * 81.0, rel=1e-12)

    def test_monotone_separation(self):
        # Shift one operand along the first axis; score must rise with the gap.
        rng = np.random.default_rng(31)
        base_x = rng.normal(size=(200, 4))
        base_y = rng.normal(size=(200, 4))
        x = as_set(base_x)
        bw = median_heuristic(x, as_set(base_y, prefix="y"))
        cfg = KernelConfig(bandwidth=bw)
        scores = []
        for delta in (0.0, 1.0, 2.0, 4.0):
            shifted = base_y.copy()
            shifted[:, 0] += delta
            scores.append(mmd(x, as_set(shifted, prefix="y"), cfg))
        assert scores == sorted(scores)
        assert len(set(scores)) == 4


class TestCalculator:
    def test_equal_sizes_single_pass(self):
        rng = np.random.default_rng(17)
        a = as_set(rng.normal(size=(10, 3)))
        b = as_set(rng.normal(size=(10, 3)), prefix="y")
        est = mmd_calculator(a, b, KernelConfig(bandwidth=1.0), repetitions=10, seed=0)
        assert est.repetitions == 1
        assert est.stddev == 0.0
        assert est.mean == mmd(a, b, KernelConfig(bandwidth=1.0))
        assert est.sizes == (10, 10)

    def test_identical_equal_sets(self):
        a = as_set([[1.0, 2.0], [3.0, 4.0]])
        est = mmd_calculator(a, a, KernelConfig(bandwidth=1.0), repetitions=5, seed=1)
        assert est.mean == 0.0 and est.stddev == 0.0

    def test_degenerate_resampling(self):
        # Singleton equal to every point of the larger set: resampling changes nothing.
        a = as_set([[2.0, 2.0]])
        b = as_set([[2.0, 2.0]] * 3, prefix="y")
        est = mmd_calculator(a, b, KernelConfig(bandwidth=1.0), repetitions=7, seed=3)
        assert est.mean == 0.0
        assert est.stddev == 0.0
        assert est.repetitions == 7
        assert est.sizes == (1, 3)

    def test_deterministic_and_seed_sensitive(self):
        rng = np.random.default_rng(23)
        a = as_set(rng.normal(size=(20, 4)))
        b = as_set(rng.normal(size=(30, 4)) + 0.4, prefix="y")
        cfg = KernelConfig(bandwidth=MEDIAN_HEURISTIC)
        e1 = mmd_calculator(a, b, cfg, repetitions=10, seed=42)
        e2 = mmd_calculator(a, b, cfg, repetitions=10, seed=42)
        e3 = mmd_calculator(a, b, cfg, repetitions=10, seed=43)
        assert (e1.mean, e1.stddev) == (e2.mean, e2.stddev)
        assert (e1.mean, e1.stddev) != (e3.mean, e3.stddev)
        assert e1.sizes == (20, 30)
        assert e1.repetitions == 10

    def test_reference_resampling_oracle(self):
        """Re-derive the estimate with an external loop over per-rep seeds."""
        from divsat.rng import make_rng

        rng = np.random.default_rng(29)
        rows_a = rng.normal(size=(6, 2))
        rows_b = rng.normal(size=(9, 2)) + 1.0
        a = as_set(rows_a)
        b = as_set(rows_b, prefix="y")
        bw = oracle_median(np.vstack([rows_a, rows_b]).tolist())
        scores = []
        for r in range(4):
            gen = make_rng(100 + r)
            idx = gen.integers(0, 6, size=9)
            boosted = rows_a[idx]
            scores.append(oracle_mmd(boosted.tolist(), rows_b.tolist(), bw))
        est = mmd_calculator(a, b, KernelConfig(bandwidth=MEDIAN_HEURISTIC), repetitions=4, seed=100)
        assert est.bandwidth_used == pytest.approx(bw, abs=1e-12)
        assert est.mean == pytest.approx(float(np.mean(scores)), rel=1e-9)
        assert est.stddev == pytest.approx(float(np.std(scores)), rel=1e-9, abs=1e-12)

    def test_zero_repetitions_rejected(self):
        a = as_set([[1.0]])
        b = as_set([[1.0], [2.0]], prefix="y")
        with pytest.raises(InvalidRepetitions):
            mmd_calculator(a, b, KernelConfig(bandwidth=1.0), repetitions=0, seed=0)

    def test_unnormalized_estimate(self):
        rng = np.random.default_rng(37)
        a = as_set(rng.normal(size=(5, 2)))
        b = as_set(rng.normal(size=(8, 2)), prefix="y")
        cfg = KernelConfig(bandwidth=1.0)
        n_est = mmd_calculator(a, b, cfg, repetitions=6, seed=9)
        r_est = mmd_calculator(a, b, cfg, repetitions=6, seed=9, normalized=False)
        assert r_est.mean == pytest.approx(n_est.mean * 64.0, rel=1e-12)
        assert r_est.stddev == pytest.approx(n_est.stddev * 64.0, rel=1e-12)


sets_3d = hnp.arrays(
    np.float64,
    st.tuples(st.integers(1, 12), st.just(3)),
    elements=st.floats(-10, 10, allow_nan=False),
)


@settings(max_examples=50, deadline=None)
@given(sets_3d, sets_3d, st.floats(0.05, 5.0))
def test_mmd_nonnegative_property(xa, ya, bw):
    n = min(len(xa), len(ya))
    x = as_set(xa[:n])
    y = as_set(ya[:n], prefix="y")
    score = mmd(x, y, KernelConfig(bandwidth=float(bw)))
    assert score >= 0.0
