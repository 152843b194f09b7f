import numpy as np
import pytest

from conftest import gaussian_clusters
from oracles import naive_hdbscan
from qda.clustering import (
    ClusterAssignment,
    ClusterConfig,
    CondensedTree,
    build_mst,
    condense_tree,
    core_distances,
    cluster_stability,
    extract_clusters_eom,
    hdbscan,
    mutual_reachability,
    mutual_reachability_matrix,
    single_linkage_tree,
)


class TestConfig:
    def test_min_samples_defaults_to_min_cluster_size(self):
        assert ClusterConfig(min_cluster_size=7).effective_min_samples == 7
        assert ClusterConfig(min_cluster_size=7, min_samples=3).effective_min_samples == 3

    def test_validation(self):
        with pytest.raises(ValueError):
            ClusterConfig(min_cluster_size=1)
        with pytest.raises(ValueError):
            ClusterConfig(min_samples=0)
        with pytest.raises(ValueError):
            ClusterConfig(selection="leaf")


class TestCoreDistances:
    def test_collinear_min_samples_1(self):
        pts = np.array([[0.0], [1.0], [2.0]])
        assert core_distances(pts, 1).tolist() == [1.0, 1.0, 1.0]

    def test_collinear_min_samples_2(self):
        pts = np.array([[0.0], [1.0], [2.0]])
        assert core_distances(pts, 2).tolist() == [2.0, 1.0, 2.0]

    def test_min_samples_too_large(self):
        with pytest.raises(ValueError):
            core_distances(np.zeros((3, 1)), 3)

    def test_duplicates_give_zero(self):
        pts = np.array([[1.0, 1.0], [1.0, 1.0], [5.0, 5.0]])
        assert core_distances(pts, 1)[0] == 0.0


def test_mutual_reachability_definition():
    assert mutual_reachability(3.0, 1.0, 2.0) == 3.0
    assert mutual_reachability(0.5, 4.0, 2.0) == 4.0
    assert mutual_reachability(0.5, 1.0, 6.0) == 6.0


def test_mutual_reachability_matrix_symmetric(rng):
    pts = rng.normal(0, 1, (12, 3))
    m = mutual_reachability_matrix(pts, 3)
    assert np.allclose(m, m.T)
    assert np.allclose(np.diag(m), 0.0)


class TestMst:
    def test_total_weight_matches_reference(self, rng):
        from scipy.sparse.csgraph import minimum_spanning_tree

        pts = rng.normal(0, 1, (25, 3))
        m = mutual_reachability_matrix(pts, 3)
        ours = build_mst(m)[:, 2].sum()
        ref = minimum_spanning_tree(m).sum()
        assert ours == pytest.approx(ref, rel=1e-12)

    def test_edge_count(self, rng):
        m = mutual_reachability_matrix(rng.normal(0, 1, (10, 2)), 2)
        assert build_mst(m).shape == (9, 3)

    def test_too_few_points(self):
        with pytest.raises(ValueError):
            build_mst(np.zeros((1, 1)))

    def test_tie_break_smaller_index(self):
        # equilateral graph: every edge weight 1; deterministic choice
        w = np.ones((4, 4)) - np.eye(4)
        edges = build_mst(w)
        assert edges.tolist() == [[0.0, 1.0, 1.0], [0.0, 2.0, 1.0], [0.0, 3.0, 1.0]]


class TestSingleLinkage:
    def test_sizes_accumulate(self, rng):
        pts = rng.normal(0, 1, (14, 2))
        m = mutual_reachability_matrix(pts, 2)
        slt = single_linkage_tree(build_mst(m))
        assert slt.shape == (13, 4)
        assert slt[-1, 3] == 14
        assert (np.diff(slt[:, 2]) >= 0).all()  # heights ascend


class TestCondensedTree:
    def make_tree(self, rng, n=40, mcs=5):
        pts = np.vstack(
            [rng.normal(0, 0.3, (n // 2, 2)), rng.normal(10, 0.3, (n // 2, 2))]
        )
        core = core_distances(pts, 3)
        m = mutual_reachability_matrix(pts, 3)
        slt = single_linkage_tree(build_mst(m))
        return condense_tree(slt, mcs), pts

    def test_lambda_non_decreasing_root_to_leaf(self, rng):
        tree, _ = self.make_tree(rng)
        birth = {tree.root: 0.0}
        for p, c, lam in zip(tree.parent, tree.child, tree.lam):
            if c >= tree.n_points:
                birth[int(c)] = float(lam)
        for p, lam in zip(tree.parent, tree.lam):
            assert lam >= birth[int(p)] - 1e-12

    def test_every_point_falls_out_exactly_once(self, rng):
        tree, pts = self.make_tree(rng)
        points = sorted(int(c) for c in tree.child if c < tree.n_points)
        assert points == list(range(len(pts)))

    def test_all_points_fall_from_root_when_mcs_exceeds_n(self, rng):
        tree, pts = self.make_tree(rng, n=20, mcs=50)
        assert set(tree.parent.tolist()) == {tree.root}
        assert len(tree.child) == len(pts)

    def test_stability_hand_computed(self):
        # two clusters born at lambda=1 under the root; members leave at
        # lambda 2 and 4 -> stability per cluster = (2-1)+(4-1) = 4
        n = 4
        tree = CondensedTree(
            parent=np.array([n, n, n + 1, n + 1, n + 2, n + 2]),
            child=np.array([n + 1, n + 2, 0, 1, 2, 3]),
            lam=np.array([1.0, 1.0, 2.0, 4.0, 2.0, 4.0]),
            size=np.array([2, 2, 1, 1, 1, 1]),
            n_points=n,
        )
        s = cluster_stability(tree)
        assert s[n + 1] == pytest.approx(4.0)
        assert s[n + 2] == pytest.approx(4.0)
        # root's children leave at lambda 1 with size 2 each; birth 0
        assert s[n] == pytest.approx(4.0)


class TestExtraction:
    def test_two_blobs(self, rng):
        pts, y = gaussian_clusters(rng, 2, 30, 2, spread=0.3, sep=12.0)
        asg = hdbscan(pts, ClusterConfig(min_cluster_size=10))
        assert asg.n_clusters() == 2
        # points of one blob share a label
        for c in (0, 1):
            blob_labels = asg.labels[y == c]
            kept = blob_labels[blob_labels >= 0]
            assert kept.size > 0 and np.unique(kept).size == 1

    def test_parent_preferred_on_stability_tie(self):
        # root -> single cluster whose stability equals its two children's sum
        n = 8
        tree = CondensedTree(
            parent=np.array([n] * 0 + [n, n + 1, n + 1] + [n + 2] * 2 + [n + 3] * 2 + [n] * 4),
            child=np.array([n + 1, n + 2, n + 3, 0, 1, 2, 3, 4, 5, 6, 7]),
            lam=np.array([1.0, 2.0, 2.0, 3.0, 3.0, 3.0, 3.0, 1.0, 1.0, 1.0, 1.0]),
            size=np.array([4, 2, 2, 1, 1, 1, 1, 1, 1, 1, 1]),
            n_points=n,
        )
        # S(n+2) = S(n+3) = (3-2)*2 = 2; S(n+1) = (2-1)*2 + (2-1)*2 = 4 = sum
        asg = extract_clusters_eom(tree)
        assert asg.n_clusters() == 1  # parent n+1 kept, children dissolved
        assert (asg.labels[:4] == 0).all()
        assert (asg.labels[4:] == -1).all()

    def test_all_identical_points_single_cluster(self):
        pts = np.zeros((30, 2))
        asg = hdbscan(pts, ClusterConfig(min_cluster_size=5, min_samples=3))
        assert (asg.labels == 0).all()
        assert (asg.strengths == 1.0).all()

    def test_uniform_noise_all_outliers(self, rng):
        pts = rng.uniform(0, 1, (40, 2))
        asg = hdbscan(pts, ClusterConfig(min_cluster_size=30, min_samples=5))
        # one giant root cluster would need 30+ stable points; sparse uniform
        # noise with a huge min_cluster_size yields no selected cluster
        assert asg.n_clusters() == 0
        assert (asg.labels == -1).all()
        assert (asg.strengths == 0.0).all()

    def test_labels_renumbered_by_size(self, rng):
        sizes = (50, 20, 35)
        blobs = [
            rng.normal((0, 0), 0.3, (sizes[0], 2)),
            rng.normal((20, 0), 0.3, (sizes[1], 2)),
            rng.normal((0, 20), 0.3, (sizes[2], 2)),
        ]
        pts = np.vstack(blobs)
        asg = hdbscan(pts, ClusterConfig(min_cluster_size=10, min_samples=5))
        assert asg.cluster_sizes() == sorted(sizes, reverse=True)

    def test_outlier_strength_zero_members_positive(self, rng):
        pts, _ = gaussian_clusters(rng, 2, 25, 2, spread=0.4, sep=10.0)
        pts = np.vstack([pts, rng.uniform(-30, 30, (6, 2))])
        asg = hdbscan(pts, ClusterConfig(min_cluster_size=8, min_samples=4))
        assert ((asg.strengths == 0.0) == (asg.labels == -1)).all()
        assert (asg.strengths[asg.labels >= 0] > 0.0).all()
        assert (asg.strengths <= 1.0).all()

    def test_min_samples_at_least_n_rejected(self):
        with pytest.raises(ValueError):
            hdbscan(np.zeros((4, 2)), ClusterConfig(min_cluster_size=2, min_samples=4))


class TestOracleAgreement:
    """Exact label equality against the from-scratch reference."""

    @pytest.mark.parametrize("seed", range(12))
    def test_random_instances(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(10, 64))
        d = int(rng.integers(2, 5))
        if seed % 3 == 0:
            pts = rng.normal(0, 1, (n, d))
        elif seed % 3 == 1:
            k = int(rng.integers(2, 4))
            pts, _ = gaussian_clusters(rng, k, n // k + 1, d, spread=0.5, sep=7.0)
            pts = pts[:n]
        else:
            pts = np.round(rng.normal(0, 1, (n, d)), 1)  # duplicates and ties
        mcs = int(rng.integers(2, max(3, n // 4)))
        ms = int(rng.integers(1, min(n - 1, mcs + 3)))
        ours = hdbscan(pts, ClusterConfig(min_cluster_size=mcs, min_samples=ms))
        ref = naive_hdbscan(pts.tolist(), mcs, ms)
        assert ours.labels.tolist() == ref


def test_assignment_csv_round_trip(tmp_path, rng):
    pts, _ = gaussian_clusters(rng, 2, 20, 2)
    asg = hdbscan(pts, ClusterConfig(min_cluster_size=8))
    path = tmp_path / "assignment.csv"
    asg.write_csv(path)
    back = ClusterAssignment.read_csv(path)
    assert np.array_equal(back.labels, asg.labels)
    assert np.array_equal(back.strengths, asg.strengths)
    header = path.read_text().splitlines()[0]
    assert header == "sent_id,label,strength"
