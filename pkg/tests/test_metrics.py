from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from urbanfuse import metrics
from urbanfuse.data import Dataset
from urbanfuse.graph import StreetGraph

from .oracles import (
    brute_cohesion,
    brute_separation,
    brute_silhouette_pair,
    dtw_enumerate,
    dtw_recursive,
    naive_euclidean,
)

series = st.lists(st.floats(-50, 50, allow_nan=False), min_size=1, max_size=12)


class TestEuclidean:
    def test_three_four_five(self):
        assert metrics.dist_euclidean([0, 0], [3, 4]) == 5.0

    def test_self_distance_zero(self):
        x = np.random.default_rng(0).normal(size=7)
        assert metrics.dist_euclidean(x, x) == 0.0

    def test_matches_naive_oracle(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            x, y = rng.normal(size=(2, 11))
            assert metrics.dist_euclidean(x, y) == pytest.approx(
                naive_euclidean(x, y), abs=1e-12
            )

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            metrics.dist_euclidean([1, 2], [1, 2, 3])


class TestDtw:
    def test_identical_series_zero(self):
        s = [3.0, 1.0, 4.0, 1.5]
        assert metrics.dist_dtw(s, s) == 0.0

    def test_constant_offset(self):
        # every alignment has >= 3 unit-cost steps; the diagonal attains it
        assert metrics.dist_dtw([0, 0, 0], [1, 1, 1]) == 3.0

    def test_shifted_ramp(self):
        # frozen value verified by exhaustive path enumeration
        assert metrics.dist_dtw([1, 2, 3], [2, 3, 4]) == 2.0
        assert dtw_enumerate([1, 2, 3], [2, 3, 4]) == 2.0

    def test_empty_series_rejected(self):
        with pytest.raises(ValueError):
            metrics.dist_dtw([], [1.0])

    def test_matches_enumeration_on_short_series(self):
        rng = np.random.default_rng(7)
        for _ in range(60):
            a = rng.normal(size=rng.integers(1, 7))
            b = rng.normal(size=rng.integers(1, 7))
            assert metrics.dist_dtw(a, b) == pytest.approx(dtw_enumerate(a, b), abs=1e-12)

    @settings(max_examples=60, deadline=None)
    @given(series, series)
    def test_symmetry_and_nonnegativity(self, a, b):
        d_ab = metrics.dist_dtw(a, b)
        assert d_ab >= 0.0
        assert d_ab == pytest.approx(metrics.dist_dtw(b, a), rel=1e-12, abs=1e-12)
        assert metrics.dist_dtw(a, a) == 0.0

    def test_pairwise_matrix_matches_scalar(self):
        rng = np.random.default_rng(3)
        s = rng.normal(size=(6, 9))
        mat = metrics.pairwise_dtw(s)
        for i in range(6):
            for j in range(6):
                expect = 0.0 if i == j else metrics.dist_dtw(s[i], s[j])
                assert mat[i, j] == pytest.approx(expect, abs=1e-12)


class TestCohesionSeparation:
    def test_two_point_cluster(self):
        assert metrics.cohesion([np.array([0.0]), np.array([2.0])]) == 2.0

    def test_singleton_is_zero(self):
        assert metrics.cohesion([np.array([5.0, 5.0])]) == 0.0

    def test_matches_brute_force(self):
        rng = np.random.default_rng(11)
        pts = list(rng.normal(size=(10, 3)))
        assert metrics.cohesion(pts) == pytest.approx(
            brute_cohesion(pts, naive_euclidean), abs=1e-12
        )

    def test_separation_example(self):
        a = [np.array([0.0]), np.array([1.0])]
        b = [np.array([5.0]), np.array([9.0])]
        assert metrics.separation(a, b) == 4.0

    def test_separation_shared_point(self):
        p = np.array([2.0, 3.0])
        assert metrics.separation([p, p + 5], [p.copy(), p + 9]) == 0.0

    def test_separation_matches_brute_force(self):
        rng = np.random.default_rng(13)
        a = list(rng.normal(size=(6, 4)))
        b = list(rng.normal(size=(8, 4)))
        assert metrics.separation(a, b) == pytest.approx(
            brute_separation(a, b, naive_euclidean), abs=1e-12
        )


class TestSilhouettePair:
    def test_far_singletons(self):
        assert metrics.silhouette_pair([np.array([0.0])], [np.array([100.0])]) == 1.0

    def test_equal_cohesion_and_separation(self):
        # a_k = a_l = b_kl = 2 -> numerators vanish
        a = [np.array([0.0]), np.array([2.0])]
        b = [np.array([4.0]), np.array([6.0])]
        assert metrics.silhouette_pair(a, b) == 0.0

    def test_matches_independent_formula(self):
        rng = np.random.default_rng(17)
        for _ in range(25):
            a = list(rng.normal(size=(rng.integers(1, 8), 5)))
            b = list(rng.normal(loc=2.0, size=(rng.integers(1, 8), 5)))
            assert metrics.silhouette_pair(a, b) == pytest.approx(
                brute_silhouette_pair(a, b, naive_euclidean), abs=1e-12
            )

    def test_symmetry(self):
        rng = np.random.default_rng(19)
        a = list(rng.normal(size=(5, 2)))
        b = list(rng.normal(loc=1.0, size=(7, 2)))
        assert metrics.silhouette_pair(a, b) == pytest.approx(
            metrics.silhouette_pair(b, a), abs=1e-12
        )

    @settings(max_examples=40, deadline=None)
    @given(
        st.lists(st.floats(-10, 10, allow_nan=False), min_size=1, max_size=6),
        st.lists(st.floats(-10, 10, allow_nan=False), min_size=1, max_size=6),
    )
    def test_bounded(self, xs, ys):
        a = [np.array([v]) for v in xs]
        b = [np.array([v]) for v in ys]
        s = metrics.silhouette_pair(a, b)
        assert -1.0 <= s <= 1.0


class TestKmeans:
    def test_two_obvious_clusters(self):
        pts = np.array([[0.0], [1.0], [10.0], [11.0]])
        out = metrics.kmeans(pts, 2, seed=0)
        assert out.labels[0] == out.labels[1]
        assert out.labels[2] == out.labels[3]
        assert out.labels[0] != out.labels[2]
        assert sorted(out.centers.ravel()) == pytest.approx([0.5, 10.5])

    def test_k_equals_one_inertia_is_total_variance(self):
        rng = np.random.default_rng(23)
        pts = rng.normal(size=(40, 3))
        out = metrics.kmeans(pts, 1, seed=0)
        expected = ((pts - pts.mean(axis=0)) ** 2).sum()
        assert out.inertia == pytest.approx(expected, rel=1e-12)

    def test_inertia_trace_non_increasing(self):
        rng = np.random.default_rng(29)
        pts = rng.normal(size=(120, 4))
        out = metrics.kmeans(pts, 5, seed=3)
        trace = np.array(out.inertia_trace)
        assert (np.diff(trace) <= 1e-9 * trace[:-1]).all()

    def test_k_larger_than_n_rejected(self):
        with pytest.raises(ValueError):
            metrics.kmeans(np.zeros((3, 2)), 4, seed=0)

    def test_every_cluster_occupied(self):
        rng = np.random.default_rng(31)
        pts = rng.normal(size=(30, 2))
        out = metrics.kmeans(pts, 7, seed=1)
        assert set(out.labels) == set(range(7))

    def test_determinism(self):
        rng = np.random.default_rng(37)
        pts = rng.normal(size=(50, 3))
        a = metrics.kmeans(pts, 4, seed=9)
        b = metrics.kmeans(pts, 4, seed=9)
        assert (a.labels == b.labels).all()
        assert a.inertia == b.inertia


def _dataset_from_arrays(static, dynamic, seed=0) -> Dataset:
    n = static.shape[0]
    rng = np.random.default_rng(seed)
    edges = np.array([[i, i + 1] for i in range(n - 1)])
    graph = StreetGraph(
        node_ids=np.arange(n),
        lon=rng.uniform(0, 1, n),
        lat=rng.uniform(0, 1, n),
        edges=edges,
    )
    time_axis = [(2006, 1 + t % 12) if t < 12 else (2006 + t // 12, 1 + t % 12) for t in range(dynamic.shape[1])]
    return Dataset(
        graph=graph,
        static=static,
        static_names=[f"f{j}" for j in range(static.shape[1])],
        dynamic=dynamic,
        time_axis=time_axis,
    )


class TestEvaluate:
    def test_two_clusters_give_one_pair(self):
        rng = np.random.default_rng(41)
        static = rng.uniform(0, 1, size=(12, 3))
        dynamic = rng.uniform(0, 1, size=(12, 5))
        ds = _dataset_from_arrays(static, dynamic)
        emb = np.vstack([rng.normal(0, 0.1, (6, 2)), rng.normal(8, 0.1, (6, 2))])
        out = metrics.evaluate_embedding(ds, emb, k=2, seed=0)
        assert len(out.pairs) == 1
        assert out.quadrants.n_pairs == 1

    def test_injected_labels_match_oracle(self):
        rng = np.random.default_rng(43)
        n, k = 18, 3
        labels = rng.integers(0, k, size=n)
        labels[:k] = np.arange(k)  # every cluster occupied
        static = rng.normal(size=(n, 4))
        dynamic = np.abs(rng.normal(size=(n, 6)))
        ds = _dataset_from_arrays(static, dynamic)
        pairs, _ = metrics.evaluate_with_labels(ds, labels)
        for p in pairs:
            mem_a = np.flatnonzero(labels == p.cluster_a)
            mem_b = np.flatnonzero(labels == p.cluster_b)
            s_static = brute_silhouette_pair(
                list(static[mem_a]), list(static[mem_b]), naive_euclidean
            )
            s_dynamic = brute_silhouette_pair(
                list(dynamic[mem_a]), list(dynamic[mem_b]), dtw_recursive
            )
            assert p.s_static == pytest.approx(s_static, abs=1e-12)
            assert p.s_dynamic == pytest.approx(s_dynamic, abs=1e-12)

    def test_one_hot_embedding_recovers_injected_labels(self):
        rng = np.random.default_rng(47)
        n, k = 20, 4
        labels = np.array([i % k for i in range(n)])
        static = rng.normal(size=(n, 3)) + 6 * labels[:, None]
        dynamic = np.abs(rng.normal(size=(n, 5))) + 3 * labels[:, None]
        ds = _dataset_from_arrays(static, dynamic)
        onehot = np.eye(k)[labels]
        out = metrics.evaluate_embedding(ds, onehot, k=k, seed=0)
        direct, _ = metrics.evaluate_with_labels(ds, labels)
        got = sorted((p.s_static, p.s_dynamic) for p in out.pairs)
        want = sorted((p.s_static, p.s_dynamic) for p in direct)
        assert got == pytest.approx(want, abs=1e-12)

    def test_quadrant_sign_partition(self):
        pairs = [
            metrics.SilhouettePair(0, 1, 0.5, 0.5),
            metrics.SilhouettePair(0, 2, -0.2, 0.3),
            metrics.SilhouettePair(1, 2, 0.4, -0.1),
            metrics.SilhouettePair(2, 3, -0.3, -0.4),
        ]
        q = metrics.quadrant_summary(pairs)
        assert q.counts == {"TR": 1, "TL": 1, "BR": 1, "BL": 1}
        assert sum(q.fractions.values()) == pytest.approx(1.0)

    def test_static_scaling_keeps_signs_and_quadrants(self):
        rng = np.random.default_rng(53)
        n, k = 24, 3
        labels = np.array([i % k for i in range(n)])
        static = rng.normal(size=(n, 4)) + 2.0 * labels[:, None]
        dynamic = np.abs(rng.normal(size=(n, 6))) + labels[:, None]
        ds = _dataset_from_arrays(static, dynamic)
        base, base_q = metrics.evaluate_with_labels(ds, labels)
        scaled_ds = _dataset_from_arrays(static * 37.5, dynamic)
        scaled, scaled_q = metrics.evaluate_with_labels(scaled_ds, labels)
        for p, q in zip(base, scaled):
            assert np.sign(p.s_static) == np.sign(q.s_static)
            assert q.s_dynamic == pytest.approx(p.s_dynamic, abs=1e-12)
        assert base_q.counts == scaled_q.counts

    def test_subsample_cap_infinite_equals_exhaustive(self):
        rng = np.random.default_rng(59)
        n, k = 30, 3
        labels = np.array([i % k for i in range(n)])
        static = rng.normal(size=(n, 3))
        dynamic = np.abs(rng.normal(size=(n, 4)))
        ds = _dataset_from_arrays(static, dynamic)
        full, _ = metrics.evaluate_with_labels(ds, labels, subsample_cap=None)
        capped, _ = metrics.evaluate_with_labels(ds, labels, subsample_cap=10**9)
        assert [(p.s_static, p.s_dynamic) for p in full] == [
            (p.s_static, p.s_dynamic) for p in capped
        ]

    def test_precomputed_distances_match(self):
        rng = np.random.default_rng(61)
        n, k = 21, 3
        labels = np.array([i % k for i in range(n)])
        static = rng.normal(size=(n, 3))
        dynamic = np.abs(rng.normal(size=(n, 4)))
        ds = _dataset_from_arrays(static, dynamic)
        d_s, d_d = metrics.full_distance_matrices(ds)
        direct, _ = metrics.evaluate_with_labels(ds, labels)
        cached, _ = metrics.evaluate_with_labels(ds, labels, dist_static=d_s, dist_dynamic=d_d)
        assert [(p.s_static, p.s_dynamic) for p in direct] == [
            (p.s_static, p.s_dynamic) for p in cached
        ]

    def test_empty_cluster_rejected(self):
        rng = np.random.default_rng(67)
        ds = _dataset_from_arrays(rng.normal(size=(6, 2)), np.abs(rng.normal(size=(6, 3))))
        labels = np.array([0, 0, 0, 2, 2, 2])  # cluster 1 empty
        with pytest.raises(ValueError, match="empty"):
            metrics.evaluate_with_labels(ds, labels)

    def test_misaligned_embedding_rejected(self):
        rng = np.random.default_rng(71)
        ds = _dataset_from_arrays(rng.normal(size=(6, 2)), np.abs(rng.normal(size=(6, 3))))
        with pytest.raises(ValueError, match="align"):
            metrics.evaluate_embedding(ds, rng.normal(size=(5, 2)), k=2, seed=0)
