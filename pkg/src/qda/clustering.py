"""Density clustering of reduced points with outlier detection.

Hierarchical density-based clustering over mutual-reachability distances:
core distances, an exact minimum spanning tree (Prim with a deterministic
tie-break), single-linkage condensation with a minimum cluster size, and
excess-of-mass cluster selection. Low-density points are labeled -1.

Determinism matters more here than speed: the MST tie-break (smaller weight,
then smaller vertex index) makes the whole clustering invariant to input
permutation up to the size-descending relabeling rule.
"""

from __future__ import annotations

import csv
from collections import deque
from dataclasses import dataclass
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class ClusterConfig:
    min_cluster_size: int = 15
    min_samples: int | None = None  # defaults to min_cluster_size
    selection: str = "excess-of-mass"

    def __post_init__(self) -> None:
        if self.min_cluster_size < 2:
            raise ValueError("min_cluster_size must be >= 2")
        if self.min_samples is not None and self.min_samples < 1:
            raise ValueError("min_samples must be >= 1")
        if self.selection != "excess-of-mass":
            raise ValueError(f"unknown selection mode {self.selection!r}")

    @property
    def effective_min_samples(self) -> int:
        return self.min_samples if self.min_samples is not None else self.min_cluster_size

    def to_dict(self) -> dict:
        return {
            "min_cluster_size": self.min_cluster_size,
            "min_samples": self.effective_min_samples,
            "selection": self.selection,
        }


@dataclass
class ClusterAssignment:
    labels: np.ndarray  # (n,) int64, -1 or 0..T-1
    strengths: np.ndarray  # (n,) float64 in [0, 1], 0 exactly for outliers

    @property
    def n(self) -> int:
        return self.labels.shape[0]

    def n_clusters(self) -> int:
        return int(self.labels.max() + 1) if (self.labels >= 0).any() else 0

    def cluster_sizes(self) -> list[int]:
        return [int((self.labels == t).sum()) for t in range(self.n_clusters())]

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["sent_id", "label", "strength"])
            for i, (lab, s) in enumerate(zip(self.labels, self.strengths)):
                w.writerow([i, int(lab), repr(float(s))])

    @classmethod
    def read_csv(cls, path: str | Path) -> "ClusterAssignment":
        labels, strengths = [], []
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            for row in reader:
                labels.append(int(row["label"]))
                strengths.append(float(row["strength"]))
        return cls(np.asarray(labels, dtype=np.int64), np.asarray(strengths))


@dataclass
class CondensedTree:
    """Rows (parent, child, lambda, child_size); cluster ids start at n_points.

    child < n_points means a point falling out of its parent cluster at the
    given lambda (= 1/distance, inf for zero distance); child >= n_points is a
    nested cluster born at that lambda.
    """

    parent: np.ndarray
    child: np.ndarray
    lam: np.ndarray
    size: np.ndarray
    n_points: int

    @property
    def root(self) -> int:
        return self.n_points

    def cluster_ids(self) -> np.ndarray:
        return np.unique(self.parent)


def pairwise_distances(points: np.ndarray) -> np.ndarray:
    """Dense euclidean distance matrix, float64."""
    X = np.asarray(points, dtype=np.float64)
    diffs = X[:, None, :] - X[None, :, :]
    return np.sqrt((diffs * diffs).sum(axis=2))


def core_distances(points: np.ndarray, min_samples: int) -> np.ndarray:
    """Distance to each point's min_samples-th nearest neighbor, self excluded."""
    X = np.asarray(points, dtype=np.float64)
    n = X.shape[0]
    if min_samples >= n:
        raise ValueError(f"min_samples={min_samples} must be < n={n}")
    core = np.empty(n)
    for i in range(n):
        diffs = X - X[i]
        d = np.sqrt((diffs * diffs).sum(axis=1))
        d[i] = np.inf
        core[i] = np.partition(d, min_samples - 1)[min_samples - 1]
    return core


def mutual_reachability(d_ij: float, core_i: float, core_j: float) -> float:
    """max(core_i, core_j, d_ij): distance in the density-adjusted metric."""
    return max(core_i, core_j, d_ij)


def mutual_reachability_matrix(points: np.ndarray, min_samples: int) -> np.ndarray:
    d = pairwise_distances(points)
    core = core_distances(points, min_samples)
    m = np.maximum(d, np.maximum(core[:, None], core[None, :]))
    np.fill_diagonal(m, 0.0)
    return m


def build_mst(graph: np.ndarray) -> np.ndarray:
    """Minimum spanning tree of a dense symmetric weight matrix by Prim's
    algorithm. Ties break toward the smaller vertex index. Rows (u, v, w)."""
    n = graph.shape[0]
    if n < 2:
        raise ValueError("MST needs at least 2 points")
    return _prim(lambda v: graph[v], n)


def _prim(row_of, n: int) -> np.ndarray:
    in_tree = np.zeros(n, dtype=bool)
    dist = np.full(n, np.inf)
    parent = np.full(n, -1, dtype=np.int64)
    edges = np.empty((n - 1, 3))
    in_tree[0] = True
    row = np.asarray(row_of(0), dtype=np.float64)
    improved = row < dist
    dist[improved] = row[improved]
    parent[improved] = 0
    for e in range(n - 1):
        masked = np.where(in_tree, np.inf, dist)
        v = int(np.argmin(masked))  # first minimum = smallest index
        edges[e] = (parent[v], v, dist[v])
        in_tree[v] = True
        row = np.asarray(row_of(v), dtype=np.float64)
        improved = (row < dist) & ~in_tree
        dist[improved] = row[improved]
        parent[improved] = v
    return edges


def _mst_implicit(points: np.ndarray, core: np.ndarray) -> np.ndarray:
    """Prim over the implicit complete mutual-reachability graph, O(n) memory."""
    X = np.asarray(points, dtype=np.float64)
    n = X.shape[0]
    if n < 2:
        raise ValueError("MST needs at least 2 points")

    def row_of(v: int) -> np.ndarray:
        diffs = X - X[v]
        d = np.sqrt((diffs * diffs).sum(axis=1))
        return np.maximum(d, np.maximum(core, core[v]))

    return _prim(row_of, n)


def single_linkage_tree(mst_edges: np.ndarray) -> np.ndarray:
    """Dendrogram rows (left, right, distance, size) from MST edges sorted by
    (weight, smaller endpoint, larger endpoint); merged nodes get ids n, n+1, ..."""
    n = mst_edges.shape[0] + 1
    u = np.minimum(mst_edges[:, 0], mst_edges[:, 1]).astype(np.int64)
    v = np.maximum(mst_edges[:, 0], mst_edges[:, 1]).astype(np.int64)
    w = mst_edges[:, 2]
    order = np.lexsort((v, u, w))
    parent = list(range(2 * n - 1))
    size = [1] * n + [0] * (n - 1)
    node_of = list(range(2 * n - 1))  # current dendrogram node of each set root

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    rows = np.empty((n - 1, 4))
    nxt = n
    for idx in order:
        ra, rb = find(u[idx]), find(v[idx])
        na, nb = node_of[ra], node_of[rb]
        sa = size[na] if na >= n else 1
        sb = size[nb] if nb >= n else 1
        rows[nxt - n] = (na, nb, w[idx], sa + sb)
        size[nxt] = sa + sb
        parent[ra] = rb
        node_of[rb] = nxt
        nxt += 1
    return rows


def _leaves_under(slt: np.ndarray, node: int, n: int) -> list[int]:
    out: list[int] = []
    stack = [node]
    while stack:
        cur = stack.pop()
        if cur < n:
            out.append(cur)
        else:
            row = slt[cur - n]
            stack.append(int(row[0]))
            stack.append(int(row[1]))
    return out


def condense_tree(slt: np.ndarray, min_cluster_size: int) -> CondensedTree:
    """Collapse the dendrogram: a split side smaller than min_cluster_size is
    points falling out of the parent cluster, not a new cluster."""
    n = slt.shape[0] + 1
    root = 2 * n - 2
    relabel = {root: n}
    next_label = n + 1
    parents: list[int] = []
    children: list[int] = []
    lams: list[float] = []
    sizes: list[int] = []

    def emit(p: int, c: int, lam: float, s: int) -> None:
        parents.append(p)
        children.append(c)
        lams.append(lam)
        sizes.append(s)

    # BFS so parent clusters are processed (and numbered) before descendants.
    queue = deque([root])
    while queue:
        node = queue.popleft()
        if node < n:
            continue
        cluster = relabel[node]
        left, right, dist = int(slt[node - n][0]), int(slt[node - n][1]), slt[node - n][2]
        lam = 1.0 / dist if dist > 0.0 else np.inf
        l_size = int(slt[left - n][3]) if left >= n else 1
        r_size = int(slt[right - n][3]) if right >= n else 1
        if l_size >= min_cluster_size and r_size >= min_cluster_size:
            for childnode, csize in ((left, l_size), (right, r_size)):
                relabel[childnode] = next_label
                emit(cluster, next_label, lam, csize)
                next_label += 1
                queue.append(childnode)
        elif l_size < min_cluster_size and r_size < min_cluster_size:
            for side in (left, right):
                for leaf in _leaves_under(slt, side, n):
                    emit(cluster, leaf, lam, 1)
        else:
            keep, drop = (left, right) if l_size >= min_cluster_size else (right, left)
            relabel[keep] = cluster
            queue.append(keep)
            for leaf in _leaves_under(slt, drop, n):
                emit(cluster, leaf, lam, 1)

    return CondensedTree(
        np.asarray(parents, dtype=np.int64),
        np.asarray(children, dtype=np.int64),
        np.asarray(lams, dtype=np.float64),
        np.asarray(sizes, dtype=np.int64),
        n,
    )


def cluster_stability(tree: CondensedTree) -> dict[int, float]:
    """Excess-of-mass stability: sum over members of (lambda_left - lambda_birth).

    Children leaving at a split contribute at the split's lambda; the root's
    birth lambda is 0 by convention.
    """
    births: dict[int, float] = {tree.root: 0.0}
    for c, lam in zip(tree.child, tree.lam):
        if c >= tree.n_points:
            births[int(c)] = float(lam)
    stability: dict[int, float] = {cid: 0.0 for cid in births}
    for p, lam, size in zip(tree.parent, tree.lam, tree.size):
        stability[int(p)] += (float(lam) - births[int(p)]) * int(size)
    return stability


def extract_clusters_eom(tree: CondensedTree) -> ClusterAssignment:
    """Select the antichain of clusters maximizing total stability; points not
    under a selected cluster are outliers (-1, strength 0)."""
    n = tree.n_points
    stability = cluster_stability(tree)
    cluster_children: dict[int, list[int]] = {cid: [] for cid in stability}
    for p, c in zip(tree.parent, tree.child):
        if c >= n:
            cluster_children[int(p)].append(int(c))

    is_cluster = {cid: True for cid in stability if cid != tree.root}
    # Child ids are always larger than parent ids, so descending order visits
    # leaves before parents.
    for node in sorted(is_cluster, reverse=True):
        subtree = sum(stability[c] for c in cluster_children[node])
        if cluster_children[node] and stability[node] < subtree:
            is_cluster[node] = False
            stability[node] = subtree
        else:
            stack = list(cluster_children[node])
            while stack:
                sub = stack.pop()
                is_cluster[sub] = False
                stack.extend(cluster_children[sub])

    selected = [cid for cid, keep in is_cluster.items() if keep]

    labels = np.full(n, -1, dtype=np.int64)
    strengths = np.zeros(n)
    if not selected:
        point_rows = tree.child < n
        if point_rows.any() and np.isinf(tree.lam[point_rows]).all():
            # Everything sits at zero mutual-reachability distance (e.g. all
            # points identical): one maximally dense cluster, not noise.
            return ClusterAssignment(np.zeros(n, dtype=np.int64), np.ones(n))
        return ClusterAssignment(labels, strengths)

    for cluster in selected:
        members: list[int] = []
        lam_points: list[float] = []
        stack = [cluster]
        while stack:
            cur = stack.pop()
            rows = tree.parent == cur
            for c, lam in zip(tree.child[rows], tree.lam[rows]):
                if c < n:
                    members.append(int(c))
                    lam_points.append(float(lam))
                else:
                    stack.append(int(c))
        lam_arr = np.asarray(lam_points)
        finite = lam_arr[np.isfinite(lam_arr)]
        lam_max = finite.max() if finite.size else np.inf
        for point, lam in zip(members, lam_points):
            labels[point] = cluster
            if np.isinf(lam):
                strengths[point] = 1.0
            else:
                strengths[point] = min(lam / lam_max, 1.0) if np.isfinite(lam_max) else 0.0

    return ClusterAssignment(*_renumber(labels, strengths))


def _renumber(labels: np.ndarray, strengths: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Relabel clusters 0..T-1 by descending size; ties by smallest member index."""
    ids = [c for c in np.unique(labels) if c >= 0]
    keyed = sorted(
        ids, key=lambda c: (-(labels == c).sum(), int(np.flatnonzero(labels == c)[0]))
    )
    mapping = {old: new for new, old in enumerate(keyed)}
    out = np.array([mapping.get(int(l), -1) for l in labels], dtype=np.int64)
    return out, strengths


def hdbscan(points: np.ndarray, config: ClusterConfig | None = None) -> ClusterAssignment:
    """Full pipeline: core distances -> mutual-reachability MST -> condensed
    tree -> excess-of-mass extraction, labels renumbered largest-first."""
    if config is None:
        config = ClusterConfig()
    X = np.asarray(points, dtype=np.float64)
    n = X.shape[0]
    ms = config.effective_min_samples
    if ms >= n:
        raise ValueError(f"min_samples={ms} must be < n={n}")
    core = core_distances(X, ms)
    mst = _mst_implicit(X, core)
    slt = single_linkage_tree(mst)
    tree = condense_tree(slt, config.min_cluster_size)
    return extract_clusters_eom(tree)
