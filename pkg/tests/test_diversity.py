import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from divsat import (
    EmbeddingSet,
    axis_stats,
    centroid_diversity,
    diversity_report,
    std_diversity,
)

SQUARE = EmbeddingSet.from_array(np.array([[0.0, 0.0], [2.0, 0.0], [0.0, 2.0], [2.0, 2.0]]))


def oracle_axis_stats(rows):
    """Two-pass per-axis mean and population stddev, plain python."""
    n = len(rows)
    k = len(rows[0])
    means = [sum(r[j] for r in rows) / n for j in range(k)]
    stds = [math.sqrt(sum((r[j] - means[j]) ** 2 for r in rows) / n) for j in range(k)]
    return means, stds


def oracle_std(rows):
    # Naive product-then-root; fine at small k.
    _, stds = oracle_axis_stats(rows)
    prod = 1.0
    for s in stds:
        prod *= s
    return prod ** (1.0 / len(stds))


def oracle_centroid(rows):
    means, _ = oracle_axis_stats(rows)
    n = len(rows)
    total = 0.0
    for r in rows:
        d = math.sqrt(sum((r[j] - means[j]) ** 2 for j in range(len(r))))
        total += d * d
    return total / n


def as_set(rows):
    return EmbeddingSet.from_array(np.asarray(rows, dtype=np.float64))


class TestFrozenValues:
    def test_square_axis_stats(self):
        st_ = axis_stats(SQUARE)
        assert np.allclose(st_.means, [1.0, 1.0])
        assert np.allclose(st_.stddevs, [1.0, 1.0])

    def test_square_metrics(self):
        assert std_diversity(SQUARE) == pytest.approx(1.0, abs=1e-12)
        assert centroid_diversity(SQUARE) == pytest.approx(2.0, abs=1e-12)

    def test_single_vector(self):
        s = as_set([[3.0, 4.0]])
        st_ = axis_stats(s)
        assert np.allclose(st_.means, [3.0, 4.0])
        assert np.allclose(st_.stddevs, [0.0, 0.0])
        assert std_diversity(s) == 0.0
        assert centroid_diversity(s) == 0.0

    def test_identical_vectors(self):
        s = as_set([[1.0, 2.0]] * 5)
        assert std_diversity(s) == 0.0
        assert centroid_diversity(s) == 0.0

    def test_constant_coordinate_zeroes_std_only(self):
        # One flat axis collapses the geometric mean but not the centroid metric.
        s = as_set([[0.0, 5.0], [2.0, 5.0], [4.0, 5.0]])
        assert std_diversity(s) == 0.0
        assert centroid_diversity(s) > 0.0

    def test_report_bundles(self):
        rep = diversity_report(SQUARE)
        assert rep.std_metric == pytest.approx(1.0)
        assert rep.centroid_metric == pytest.approx(2.0)
        assert np.allclose(rep.centroid, [1.0, 1.0])
        assert rep.n == 4 and rep.k == 2


class TestOracleEquivalence:
    def test_random_sets_match_oracles(self):
        rng = np.random.default_rng(7)
        for _ in range(40):
            n = int(rng.integers(2, 60))
            k = int(rng.integers(1, 9))
            rows = (rng.normal(size=(n, k)) * 3.0).tolist()
            s = as_set(rows)
            means, stds = oracle_axis_stats(rows)
            got = axis_stats(s)
            assert np.allclose(got.means, means, rtol=1e-12, atol=1e-12)
            assert np.allclose(got.stddevs, stds, rtol=1e-12, atol=1e-12)
            assert std_diversity(s) == pytest.approx(oracle_std(rows), rel=1e-9)
            assert centroid_diversity(s) == pytest.approx(oracle_centroid(rows), rel=1e-9)


vectors = hnp.arrays(
    np.float64,
    st.tuples(st.integers(2, 12), st.integers(1, 5)),
    elements=st.floats(-50, 50, allow_nan=False),
)


class TestProperties:
    @settings(max_examples=60, deadline=None)
    @given(vectors, st.floats(-20, 20, allow_nan=False))
    def test_translation_invariance(self, arr, shift):
        s = as_set(arr)
        t = as_set(arr + shift)
        assert std_diversity(t) == pytest.approx(std_diversity(s), rel=1e-9, abs=1e-9)
        assert centroid_diversity(t) == pytest.approx(centroid_diversity(s), rel=1e-9, abs=1e-9)

    @settings(max_examples=60, deadline=None)
    @given(vectors, st.floats(-8, 8, allow_nan=False).filter(lambda c: abs(c) > 1e-3))
    def test_scaling(self, arr, c):
        s = as_set(arr)
        sc = as_set(arr * c)
        assert std_diversity(sc) == pytest.approx(abs(c) * std_diversity(s), rel=1e-9, abs=1e-9)
        assert centroid_diversity(sc) == pytest.approx(c * c * centroid_diversity(s), rel=1e-9, abs=1e-9)

    @settings(max_examples=40, deadline=None)
    @given(vectors, st.randoms(use_true_random=False))
    def test_permutation_invariance(self, arr, rnd):
        order = list(range(arr.shape[0]))
        rnd.shuffle(order)
        s = as_set(arr)
        p = as_set(arr[order])
        assert std_diversity(p) == pytest.approx(std_diversity(s), rel=1e-12, abs=1e-12)
        assert centroid_diversity(p) == pytest.approx(centroid_diversity(s), rel=1e-12, abs=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(vectors, st.floats(0.05, 0.95))
    def test_monotone_concentration(self, arr, alpha):
        s = as_set(arr)
        cent = np.mean(arr, axis=0)
        shrunk = as_set(cent + alpha * (arr - cent))
        assert std_diversity(shrunk) == pytest.approx(alpha * std_diversity(s), rel=1e-9, abs=1e-9)
        assert centroid_diversity(shrunk) == pytest.approx(
            alpha * alpha * centroid_diversity(s), rel=1e-9, abs=1e-9
        )

    def test_zero_iff_identical(self):
        rng = np.random.default_rng(3)
        arr = rng.normal(size=(6, 3))
        assert centroid_diversity(as_set(arr)) > 0
        assert centroid_diversity(as_set(np.tile(arr[0], (6, 1)))) == 0.0


def test_gaussian_centroid_expectation():
    # E[M_cent] for an isotropic normal cloud tends to k * sigma^2.
    rng = np.random.default_rng(11)
    k, sigma = 6, 1.5
    arr = rng.normal(scale=sigma, size=(10_000, k))
    assert centroid_diversity(as_set(arr)) == pytest.approx(k * sigma * sigma, rel=0.05)
