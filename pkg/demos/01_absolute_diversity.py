"""
Absolute diversity of a single embedding set
============================================

Two scalar summaries of how spread out a set of vectors is: the std
metric (geometric mean of per-axis standard deviations, in embedding
units) and the centroid metric (mean squared distance from the centroid,
in squared units). Both are zero only for a set of identical vectors.
"""

import numpy as np

from divsat import EmbeddingSet, GaussianSpec, diversity_report, gaussian_set

# A hand-checkable anchor: the four corners of a 2x2 square. Every axis
# has standard deviation 1, and every corner sits at squared distance 2
# from the centroid (1, 1).
square = EmbeddingSet.from_array(
    np.array([[0.0, 0.0], [2.0, 0.0], [0.0, 2.0], [2.0, 2.0]])
)
report = diversity_report(square)
print("square corners:")
print(f"  std metric      {report.std_metric:.6f}   (expect 1.0)")
print(f"  centroid metric {report.centroid_metric:.6f}   (expect 2.0)")

# The metrics track the generating spread. For an isotropic Gaussian with
# per-axis sigma, the std metric estimates sigma and the centroid metric
# estimates k * sigma^2.
k = 8
for sigma in (0.25, 0.5, 1.0, 2.0):
    cloud = gaussian_set(GaussianSpec(k=k, sigma=sigma, seed=7), 5000)
    r = diversity_report(cloud)
    print(
        f"sigma={sigma:4}: std={r.std_metric:.4f} (sigma itself), "
        f"centroid={r.centroid_metric:8.4f} (about {k * sigma**2:.2f})"
    )

# Translation moves the centroid but neither metric: diversity is about
# spread, not location.
cloud = gaussian_set(GaussianSpec(k=3, sigma=1.0, seed=1), 1000)
shifted = EmbeddingSet.from_array(cloud.vectors + np.array([100.0, -40.0, 7.0]))
a, b = diversity_report(cloud), diversity_report(shifted)
print("\ntranslation by (100, -40, 7):")
print(f"  std metric      {a.std_metric:.12f} -> {b.std_metric:.12f}")
print(f"  centroid metric {a.centroid_metric:.12f} -> {b.centroid_metric:.12f}")
print(f"  centroid moved  {a.centroid.round(2)} -> {b.centroid.round(2)}")
