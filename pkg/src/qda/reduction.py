"""Nonlinear reduction of embedding matrices to 2-D for density clustering.

The standard graph construction: exact k-nearest-neighbor search, per-row
bandwidth calibration so each point's fuzzy neighborhood has total weight
log2(k), probabilistic t-conorm symmetrization, then stochastic gradient
descent on the fuzzy-set cross entropy with negative sampling. Deterministic
by contract: a fixed seed gives a bit-identical layout across runs.

All heavy loops are JIT-compiled; the optimizer is single-threaded so the
update order (and therefore the output) never depends on worker count.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numba
import numpy as np
import scipy.sparse as sp
from scipy.optimize import curve_fit

from .embeddings import EmbeddingMatrix, write_embeddings

SMOOTH_TOLERANCE = 1e-5
SIGMA_FLOOR = 1e-3


@dataclass(frozen=True)
class ReductionConfig:
    n_neighbors: int = 15
    min_dist: float = 0.1
    epochs: int = 200
    seed: int = 0
    metric: str = "cosine"
    n_components: int = 2
    learning_rate: float = 1.0
    negative_sample_rate: int = 5
    repulsion_strength: float = 1.0
    spread: float = 1.0
    track_loss: bool = False

    def __post_init__(self) -> None:
        if self.n_neighbors < 2:
            raise ValueError("n_neighbors must be >= 2")
        if self.min_dist < 0:
            raise ValueError("min_dist must be >= 0")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.metric not in ("cosine", "euclidean"):
            raise ValueError(f"unknown metric {self.metric!r}")

    def to_dict(self) -> dict:
        return {
            "n_neighbors": self.n_neighbors,
            "min_dist": self.min_dist,
            "epochs": self.epochs,
            "seed": self.seed,
            "metric": self.metric,
            "n_components": self.n_components,
            "learning_rate": self.learning_rate,
            "negative_sample_rate": self.negative_sample_rate,
            "repulsion_strength": self.repulsion_strength,
            "spread": self.spread,
        }


@dataclass
class KnnGraph:
    indices: np.ndarray  # (n, k) int64
    distances: np.ndarray  # (n, k) float64, ascending per row

    @property
    def k(self) -> int:
        return self.indices.shape[1]


@dataclass
class FuzzyGraph:
    """Symmetric sparse membership graph with weights in (0, 1]."""

    matrix: sp.csr_matrix

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def edge_dict(self) -> dict[tuple[int, int], float]:
        coo = self.matrix.tocoo()
        return {(int(i), int(j)): float(w) for i, j, w in zip(coo.row, coo.col, coo.data)}


@dataclass
class ReducedEmbedding:
    coords: np.ndarray  # (n, n_components) float32
    seed: int
    epochs: int
    loss_trace: np.ndarray = field(default_factory=lambda: np.empty(0))

    @property
    def n(self) -> int:
        return self.coords.shape[0]

    def save(self, path) -> None:
        write_embeddings(EmbeddingMatrix(self.coords, f"reduced:{self.seed}"), path)


def _prepare(data: np.ndarray, metric: str) -> np.ndarray:
    """Cast to float64; for cosine, project rows onto the unit sphere so the
    distance becomes half the squared chord length (equal to 1 - cos)."""
    X = np.asarray(data, dtype=np.float64)
    if metric == "cosine":
        norms = np.sqrt((X * X).sum(axis=1))
        norms[norms == 0.0] = 1.0
        X = X / norms[:, None]
    return X


def _row_distances(X: np.ndarray, i: int, metric: str) -> np.ndarray:
    diffs = X - X[i]
    d2 = (diffs * diffs).sum(axis=1)
    if metric == "cosine":
        return d2 / 2.0
    return np.sqrt(d2)


def knn_graph(m: EmbeddingMatrix | np.ndarray, k: int, metric: str = "cosine") -> KnnGraph:
    """Exact k nearest neighbors per row, self excluded, ties to smaller index."""
    data = m.data if isinstance(m, EmbeddingMatrix) else np.asarray(m)
    n = data.shape[0]
    if k >= n:
        raise ValueError(f"n_neighbors={k} must be < n={n}")
    X = _prepare(data, metric)
    indices = np.empty((n, k), dtype=np.int64)
    distances = np.empty((n, k), dtype=np.float64)
    for i in range(n):
        d = _row_distances(X, i, metric)
        d[i] = np.inf
        order = np.argsort(d, kind="stable")[:k]
        indices[i] = order
        distances[i] = d[order]
    return KnnGraph(indices, distances)


def smooth_knn_weights(distances: np.ndarray, k: int | None = None) -> tuple[float, float, np.ndarray]:
    """Calibrate one row: rho, sigma, and membership weights.

    rho is the nearest-neighbor distance; sigma is found by bisection so that
    sum_j exp(-max(0, d_j - rho) / sigma) = log2(k), within 1e-5 or 64
    iterations, floored at 1e-3 (all-identical rows sit on the floor).
    """
    d = np.asarray(distances, dtype=np.float64).reshape(1, -1)
    if k is None:
        k = d.shape[1]
    if k < 2:
        raise ValueError("k must be >= 2")
    rho, sigma, w = _smooth_all(d, k)
    return float(rho[0]), float(sigma[0]), w[0]


def _smooth_all(distances: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized bisection over every row at once."""
    n = distances.shape[0]
    target = np.log2(k)
    rho = distances[:, 0].copy()
    lo = np.zeros(n)
    hi = np.full(n, np.inf)
    mid = np.ones(n)

    def weight_sum(sigma: np.ndarray) -> np.ndarray:
        gaps = np.maximum(0.0, distances - rho[:, None])
        return np.exp(-gaps / sigma[:, None]).sum(axis=1)

    done = np.zeros(n, dtype=bool)
    for _ in range(64):
        psum = weight_sum(mid)
        done |= np.abs(psum - target) < SMOOTH_TOLERANCE
        if done.all():
            break
        high = (psum > target) & ~done
        hi = np.where(high, mid, hi)
        lo = np.where(~high & ~done, mid, lo)
        unbounded = ~np.isfinite(hi)
        nxt = np.where(unbounded, mid * 2.0, (lo + hi) / 2.0)
        mid = np.where(done, mid, nxt)

    sigma = np.maximum(mid, SIGMA_FLOOR)
    gaps = np.maximum(0.0, distances - rho[:, None])
    weights = np.exp(-gaps / sigma[:, None])
    return rho, sigma, weights


def fuzzy_union(g: KnnGraph, weights: np.ndarray) -> FuzzyGraph:
    """Symmetrize directed membership weights: w + w' - w*w' (probabilistic sum)."""
    n = g.indices.shape[0]
    rows = np.repeat(np.arange(n), g.k)
    w = sp.coo_matrix((weights.ravel(), (rows, g.indices.ravel())), shape=(n, n)).tocsr()
    wt = w.T.tocsr()
    sym = (w + wt - w.multiply(wt)).tocsr()
    sym.data = np.clip(sym.data, 0.0, 1.0)
    sym.eliminate_zeros()
    return FuzzyGraph(sym)


def fuzzy_graph(m: EmbeddingMatrix | np.ndarray, config: ReductionConfig) -> FuzzyGraph:
    g = knn_graph(m, config.n_neighbors, config.metric)
    _, _, weights = _smooth_all(g.distances, config.n_neighbors)
    return fuzzy_union(g, weights)


def fit_kernel_params(min_dist: float, spread: float = 1.0) -> tuple[float, float]:
    """Least-squares fit of 1/(1 + a*r^(2b)) to the offset exponential that is
    1 below min_dist and decays with the given spread beyond it."""
    xv = np.linspace(0.0, spread * 3.0, 300)
    yv = np.where(xv < min_dist, 1.0, np.exp(-(xv - min_dist) / spread))
    (a, b), _ = curve_fit(lambda x, a, b: 1.0 / (1.0 + a * x ** (2.0 * b)), xv, yv)
    return float(a), float(b)


def _spectral_init(graph: sp.csr_matrix, dim: int, rng: np.random.Generator) -> np.ndarray:
    """Eigenvectors 1..dim of the normalized graph Laplacian, scaled to ~[-10, 10].

    Falls back (deterministically, via the caller's seeded fallback) by raising
    on any numerical failure.
    """
    n = graph.shape[0]
    deg = np.asarray(graph.sum(axis=1)).ravel()
    deg[deg == 0.0] = 1.0
    d_inv_sqrt = 1.0 / np.sqrt(deg)
    if n <= 4096:
        lap = np.eye(n) - (d_inv_sqrt[:, None] * graph.toarray() * d_inv_sqrt[None, :])
        from scipy.linalg import eigh

        _, vecs = eigh(lap, subset_by_index=[0, dim])
    else:
        dmat = sp.diags(d_inv_sqrt)
        lap = sp.identity(n, format="csr") - dmat @ graph @ dmat
        from scipy.sparse.linalg import eigsh

        v0 = rng.uniform(-1.0, 1.0, n)
        _, vecs = eigsh(lap, k=dim + 1, which="SM", v0=v0, tol=1e-4, maxiter=n * 5)
    coords = vecs[:, 1 : dim + 1]
    scale = np.abs(coords).max()
    if not np.isfinite(scale) or scale == 0.0:
        raise np.linalg.LinAlgError("degenerate spectral embedding")
    coords = coords * (10.0 / scale)
    return coords + rng.normal(scale=1e-4, size=coords.shape)


def _initial_coords(graph: sp.csr_matrix, dim: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    try:
        coords = _spectral_init(graph, dim, rng)
    except Exception:
        coords = np.random.default_rng(seed).uniform(-10.0, 10.0, (graph.shape[0], dim))
    return np.ascontiguousarray(coords, dtype=np.float32)


@numba.njit(cache=True, inline="always")
def _clip(val):
    if val > 4.0:
        return 4.0
    if val < -4.0:
        return -4.0
    return val


@numba.njit(cache=True, inline="always")
def _tau_rand_int(state):
    state[0] = (((state[0] & 4294967294) << 12) & 0xFFFFFFFF) ^ (
        (((state[0] << 13) & 0xFFFFFFFF) ^ state[0]) >> 19
    )
    state[1] = (((state[1] & 4294967288) << 4) & 0xFFFFFFFF) ^ (
        (((state[1] << 2) & 0xFFFFFFFF) ^ state[1]) >> 25
    )
    state[2] = (((state[2] & 4294967280) << 17) & 0xFFFFFFFF) ^ (
        (((state[2] << 3) & 0xFFFFFFFF) ^ state[2]) >> 11
    )
    return state[0] ^ state[1] ^ state[2]


@numba.njit(cache=True)
def _sgd_epoch(
    coords,
    head,
    tail,
    epochs_per_sample,
    epoch_of_next_sample,
    epochs_per_negative_sample,
    epoch_of_next_negative_sample,
    a,
    b,
    gamma,
    alpha,
    epoch,
    rng_state,
):
    n = coords.shape[0]
    dim = coords.shape[1]
    for e in range(head.shape[0]):
        if epoch_of_next_sample[e] > epoch:
            continue
        i = head[e]
        j = tail[e]
        d2 = 0.0
        for c in range(dim):
            diff = coords[i, c] - coords[j, c]
            d2 += diff * diff
        if d2 > 0.0:
            coeff = (-2.0 * a * b * d2 ** (b - 1.0)) / (a * d2**b + 1.0)
        else:
            coeff = 0.0
        for c in range(dim):
            grad = _clip(coeff * (coords[i, c] - coords[j, c]))
            coords[i, c] += alpha * grad
            coords[j, c] -= alpha * grad
        epoch_of_next_sample[e] += epochs_per_sample[e]

        n_neg = int(
            (epoch - epoch_of_next_negative_sample[e]) / epochs_per_negative_sample[e]
        )
        for _ in range(n_neg):
            t = np.abs(_tau_rand_int(rng_state)) % n
            d2 = 0.0
            for c in range(dim):
                diff = coords[i, c] - coords[t, c]
                d2 += diff * diff
            if d2 > 0.0:
                coeff = (2.0 * gamma * b) / ((0.001 + d2) * (a * d2**b + 1.0))
            elif i == t:
                continue
            else:
                coeff = 0.0
            for c in range(dim):
                if coeff > 0.0:
                    grad = _clip(coeff * (coords[i, c] - coords[t, c]))
                else:
                    grad = 4.0
                coords[i, c] += alpha * grad
        epoch_of_next_negative_sample[e] += n_neg * epochs_per_negative_sample[e]


@numba.njit(cache=True)
def _cross_entropy(coords, w_dense, a, b):
    """Exact fuzzy-set cross entropy over all point pairs."""
    n = coords.shape[0]
    dim = coords.shape[1]
    eps = 1e-12
    total = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            d2 = 0.0
            for c in range(dim):
                diff = coords[i, c] - coords[j, c]
                d2 += diff * diff
            v = 1.0 / (1.0 + a * d2**b)
            if v < eps:
                v = eps
            elif v > 1.0 - eps:
                v = 1.0 - eps
            w = w_dense[i, j]
            if w > 0.0:
                total += w * (np.log(w) - np.log(v))
            if w < 1.0:
                total += (1.0 - w) * (np.log(1.0 - w) - np.log(1.0 - v))
    return total


def _seed_rng_state(seed: int) -> np.ndarray:
    # Three nonzero 31-bit words derived from the seed (splitmix-style).
    mask = (1 << 64) - 1
    out = np.empty(3, dtype=np.int64)
    x = (int(seed) + 0x9E3779B97F4A7C15) & mask
    for i in range(3):
        z = x
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & mask
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & mask
        z = z ^ (z >> 31)
        out[i] = (z & 0x7FFFFFFF) | 1
        x = (x + 0x9E3779B97F4A7C15) & mask
    return out


def optimize_layout(graph: FuzzyGraph, config: ReductionConfig) -> ReducedEmbedding:
    """SGD on the cross entropy: attraction along edges sampled proportionally
    to weight, repulsion via negative sampling, learning rate decaying 1 -> 0."""
    g = graph.matrix.tocoo()
    n = graph.n
    a, b = fit_kernel_params(config.min_dist, config.spread)
    coords = _initial_coords(graph.matrix, config.n_components, config.seed)

    weights = g.data.astype(np.float64)
    head = g.row.astype(np.int64)
    tail = g.col.astype(np.int64)
    if weights.size == 0:
        return ReducedEmbedding(coords, config.seed, config.epochs)

    # Edges are sampled every (w_max / w) epochs; ones below 1/epochs never fire.
    eps_per_sample = np.full(weights.shape[0], -1.0)
    n_samples = config.epochs * (weights / weights.max())
    eps_per_sample[n_samples > 0] = float(config.epochs) / n_samples[n_samples > 0]
    keep = eps_per_sample > 0
    head, tail, eps_per_sample = head[keep], tail[keep], eps_per_sample[keep]

    epoch_of_next_sample = eps_per_sample.copy()
    eps_per_neg = eps_per_sample / config.negative_sample_rate
    epoch_of_next_neg = eps_per_neg.copy()
    rng_state = _seed_rng_state(config.seed)

    track = config.track_loss
    if track and n > 4096:
        raise ValueError("loss tracking is limited to n <= 4096")
    w_dense = graph.matrix.toarray().astype(np.float64) if track else None
    losses = []

    for epoch in range(config.epochs):
        alpha = config.learning_rate * (1.0 - epoch / float(config.epochs))
        _sgd_epoch(
            coords,
            head,
            tail,
            eps_per_sample,
            epoch_of_next_sample,
            eps_per_neg,
            epoch_of_next_neg,
            a,
            b,
            config.repulsion_strength,
            alpha,
            float(epoch),
            rng_state,
        )
        if track:
            losses.append(_cross_entropy(coords, w_dense, a, b))

    return ReducedEmbedding(coords, config.seed, config.epochs, np.asarray(losses))


def reduce(m: EmbeddingMatrix | np.ndarray, config: ReductionConfig | None = None) -> ReducedEmbedding:
    """Full reduction: knn graph -> bandwidth calibration -> fuzzy union -> layout."""
    if config is None:
        config = ReductionConfig()
    return optimize_layout(fuzzy_graph(m, config), config)
