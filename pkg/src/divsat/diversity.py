"""Absolute diversity metrics for a single embedding set.

Two scalar summaries of spread:

* std diversity, the geometric mean of the per-axis population standard
  deviations, in the units of the embedding space;
* centroid diversity, the mean squared Euclidean distance from the set
  centroid, in squared units.

Both are translation invariant and independent of record order, and both
are exactly zero only when every vector is identical (the std metric also
collapses to zero whenever any single axis is constant).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .embedset import EmbeddingSet


@dataclass(frozen=True, eq=False)
class AxisStats:
    """Per-coordinate mean and population standard deviation (divisor n)."""

    means: np.ndarray
    stddevs: np.ndarray


@dataclass(frozen=True, eq=False)
class DiversityScore:
    """Both scalar metrics plus the centroid and per-axis stats behind them."""

    std_metric: float
    centroid_metric: float
    centroid: np.ndarray
    n: int
    k: int
    axis: AxisStats


def axis_stats(embeddings: EmbeddingSet) -> AxisStats:
    values = embeddings.vectors
    means = values.mean(axis=0)
    stddevs = values.std(axis=0)
    # A constant axis must report sigma exactly 0 (and its constant as the
    # mean); summing n identical floats can otherwise leave an ulp of noise.
    constant = values.max(axis=0) == values.min(axis=0)
    if constant.any():
        means = np.where(constant, values[0], means)
        stddevs = np.where(constant, 0.0, stddevs)
    return AxisStats(means=means, stddevs=stddevs)


def std_diversity(embeddings: EmbeddingSet) -> float:
    """Geometric mean of the per-axis standard deviations.

    The k-fold product is taken in log space so long products of small
    sigmas cannot underflow; an exactly-zero sigma on any axis short
    circuits to 0.0 before the log.
    """
    sigma = axis_stats(embeddings).stddevs
    if np.any(sigma == 0.0):
        return 0.0
    return float(np.exp(np.mean(np.log(sigma))))


def centroid_diversity(embeddings: EmbeddingSet) -> float:
    """Mean squared Euclidean distance of every vector from the set centroid."""
    values = embeddings.vectors
    if np.array_equal(values.max(axis=0), values.min(axis=0)):
        return 0.0
    deltas = values - values.mean(axis=0)
    return float((deltas * deltas).sum(axis=1).mean())


def diversity_report(embeddings: EmbeddingSet) -> DiversityScore:
    """Bundle both metrics with the centroid and axis stats for reporting."""
    stats = axis_stats(embeddings)
    return DiversityScore(
        std_metric=std_diversity(embeddings),
        centroid_metric=centroid_diversity(embeddings),
        centroid=stats.means,
        n=embeddings.size,
        k=embeddings.dimension,
        axis=stats,
    )
