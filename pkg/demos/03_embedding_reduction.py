"""
Nonlinear reduction of high-dimensional embeddings
==================================================

Sentence embeddings live in spaces with hundreds of dimensions, where
density-based clustering struggles. The reducer builds a fuzzy k-nearest-
neighbor graph, calibrates each point's neighborhood bandwidth, and lays the
graph out in 2D by stochastic gradient descent. This demo reduces five
well-separated 32-dimensional Gaussian clouds and verifies that the layout
keeps neighbors together — and that the same seed reproduces the exact same
layout, bit for bit.
"""

import numpy as np

from qda.reduction import ReductionConfig, reduce, smooth_knn_weights

rng = np.random.default_rng(3)

# Five Gaussian clouds of 80 points each in 32 dimensions.
centers = rng.normal(0.0, 10.0, (5, 32))
X = np.vstack([rng.normal(c, 1.0, (80, 32)) for c in centers]).astype(np.float32)
labels = np.repeat(np.arange(5), 80)
print(f"input: {X.shape[0]} points in {X.shape[1]}D")

# The bandwidth calibration gives every point the same total neighborhood
# weight, log2(k) — the property that makes the graph scale-free.
dists = np.sort(rng.uniform(0.2, 4.0, 15))
rho, sigma, w = smooth_knn_weights(dists)
print(f"calibration: rho={rho:.3f} sigma={sigma:.3f} sum(w)={w.sum():.5f} "
      f"(target log2(15)={np.log2(15):.5f})")

# Reduce to 2D.
config = ReductionConfig(n_neighbors=15, epochs=200, metric="euclidean", seed=7)
reduced = reduce(X, config)
coords = reduced.coords
print(f"layout: {coords.shape}")

# What the layout must preserve is neighborhood *structure*: a point's 2D
# neighbors should come from its own 32D cloud, even if their exact identity
# shuffles within the cloud.
def knn_sets(points, k=10):
    d = np.linalg.norm(points[:, None, :] - points[None, :, :], axis=-1)
    np.fill_diagonal(d, np.inf)
    return np.argsort(d, axis=1)[:, :k]

low = knn_sets(coords.astype(np.float64))
same_cloud = np.mean([np.mean(labels[nn] == labels[i]) for i, nn in enumerate(low)])
print(f"2D neighbors drawn from the point's own cloud: {same_cloud:.1%}")

# Cluster centroids that were far apart stay far apart relative to spread.
for c in range(5):
    pts = coords[labels == c]
    print(f"  cloud {c}: centroid=({pts[:, 0].mean():7.2f}, {pts[:, 1].mean():7.2f}) "
          f"spread={pts.std(axis=0).mean():.2f}")

# Determinism: the same configuration reproduces the layout exactly.
again = reduce(X, config)
print(f"\nsame-seed layouts bit-identical: {np.array_equal(coords, again.coords)}")
