import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import elbow_by_hand, wcss_brute
from sensemap.clustering import (
    ClusteringConfig,
    derive_sense_anchors,
    kmeans,
    select_k_elbow,
)
from sensemap.errors import CurveTooShort, EmptyCollection, TooFewVectors
from sensemap.ingest import TypeCollection


def blobs(rng, centres, n_each, sigma):
    pts = np.concatenate([c + sigma * rng.standard_normal((n_each, len(c))) for c in centres])
    labels = np.repeat(np.arange(len(centres)), n_each)
    return pts, labels


class TestKMeans:
    def test_k1_is_mean(self, rng):
        X = rng.standard_normal((50, 3))
        r = kmeans(X, 1)
        np.testing.assert_allclose(r.centroids[0], X.sum(axis=0) / 50, atol=1e-12)
        assert r.wcss == pytest.approx(wcss_brute(X, np.zeros(50, int)), rel=1e-12)

    def test_k_equals_n(self, rng):
        X = rng.standard_normal((12, 4))
        r = kmeans(X, 12)
        assert r.wcss == 0.0
        assert sorted(r.assignments.tolist()) == list(range(12))

    def test_two_blobs(self, rng):
        X, labels = blobs(rng, [np.array([10.0, 0.0]), np.array([-10.0, 0.0])], 100, 0.1)
        r = kmeans(X, 2)
        order = np.argsort(r.centroids[:, 0])[::-1]
        np.testing.assert_allclose(r.centroids[order], [[10, 0], [-10, 0]], atol=0.1)
        mapped = np.argsort(order)[r.assignments]
        assert np.array_equal(mapped, labels)

    def test_wcss_matches_brute_force(self, rng):
        X = rng.standard_normal((80, 5))
        r = kmeans(X, 4)
        assert r.wcss == pytest.approx(wcss_brute(X, r.assignments), rel=1e-12)

    def test_too_few(self):
        with pytest.raises(TooFewVectors):
            kmeans(np.zeros((3, 2)), 4)

    def test_deterministic(self, rng):
        X = rng.standard_normal((200, 6))
        a, b = kmeans(X, 5, ClusteringConfig(seed=9)), kmeans(X, 5, ClusteringConfig(seed=9))
        assert np.array_equal(a.assignments, b.assignments)
        assert np.array_equal(a.centroids, b.centroids)
        assert a.wcss == b.wcss

    def test_duplicates_never_leave_empty_cluster(self):
        X = np.array([[0.0, 0.0]] * 6 + [[1.0, 1.0]] * 2)
        r = kmeans(X, 3)
        assert np.all(np.bincount(r.assignments, minlength=3) > 0)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(1, 8))
    def test_wcss_non_increasing_and_no_empty(self, seed, k):
        r0 = np.random.default_rng(seed)
        X = r0.standard_normal((40, 3)) * r0.uniform(0.1, 3, size=3)
        r = kmeans(X, k, ClusteringConfig(seed=seed))
        h = np.array(r.history)
        assert np.all(np.diff(h) <= 1e-12 * h[:-1])
        assert np.all(np.bincount(r.assignments, minlength=k) > 0)


class TestElbow:
    def test_linear_curve(self):
        assert select_k_elbow(list(zip(range(1, 6), [100, 75, 50, 25, 0]))) == 1

    def test_sharp_knee(self):
        assert select_k_elbow(list(zip(range(1, 6), [100, 20, 15, 12, 10]))) == 2

    def test_hyperbolic(self):
        assert select_k_elbow(list(zip(range(1, 6), [100, 50, 33.3, 25, 20]))) == 2

    def test_single_point_and_empty(self):
        assert select_k_elbow([(3, 7.0)]) == 3
        with pytest.raises(CurveTooShort):
            select_k_elbow([])

    def test_blips_clamped(self):
        assert select_k_elbow([(1, 100), (2, 10), (3, 12), (4, 9)]) == elbow_by_hand([1, 2, 3, 4], [100, 10, 12, 9])

    def test_flat_curve(self):
        assert select_k_elbow([(2, 5.0), (3, 5.0), (4, 5.0)]) == 2

    @given(st.integers(1, 4), st.lists(st.floats(0, 1e6), min_size=2, max_size=10))
    def test_in_range_and_matches_hand_rule(self, k0, wcss):
        ks = list(range(k0, k0 + len(wcss)))
        k = select_k_elbow(list(zip(ks, wcss)))
        assert ks[0] <= k <= ks[-1]
        assert k == elbow_by_hand(ks, wcss)


def make_collection(dim, groups, counts=None):
    """groups: {type: (targets (n,d), sources (n,d))}."""
    coll = TypeCollection(dim, cap=10000)
    for t, (T, S) in groups.items():
        for tv, sv in zip(T, S):
            coll.add(t, tv, sv)
    if counts:
        coll.counts.update(counts)
    return coll


class TestSenseAnchors:
    def test_rare_type_falls_back(self, rng):
        T = rng.standard_normal((50, 4))
        coll = make_collection(4, {"w": (T, T)})
        out = derive_sense_anchors(coll, ClusteringConfig(), "sense")
        assert len(out) == 1 and out.entries[0].support == 50

    def test_two_senses(self, rng):
        d, sigma = 8, 0.05
        tc = rng.standard_normal((2, d))
        sc = rng.standard_normal((2, d))
        T, labels = blobs(rng, tc, 100, sigma)
        S = sc[labels] + sigma * rng.standard_normal((200, d))
        coll = make_collection(d, {"bank": (T, S)})
        out = derive_sense_anchors(coll, ClusteringConfig(), "sense")
        assert out.senses_per_type() == {"bank": 2}
        assert out.selected_k == {"bank": 2}
        assert sorted(e.support for e in out) == [100, 100]
        for e in out:
            nearest = np.argmin(np.linalg.norm(sc - e.source_anchor, axis=1))
            # mean of 100 noisy points: 3 standard errors per axis is generous
            assert np.linalg.norm(e.source_anchor - sc[nearest]) <= 3 * sigma
        assert [e.sense_index for e in out] == [0, 1]

    def test_word_level_exact_mean(self, rng):
        T, S = rng.standard_normal((300, 5)), rng.standard_normal((300, 5))
        coll = make_collection(5, {"w": (T, S)})
        (e,) = derive_sense_anchors(coll, ClusteringConfig(), "word").entries
        for anchor, data in ((e.target_anchor, T), (e.source_anchor, S)):
            brute = [sum(row[j] for row in data.tolist()) / 300 for j in range(5)]
            assert np.max(np.abs(anchor - brute)) <= 1e-12

    def test_count_threshold_is_strict(self, rng):
        T = np.concatenate([rng.standard_normal((50, 3)) + 10, rng.standard_normal((50, 3)) - 10])
        at = derive_sense_anchors(make_collection(3, {"w": (T, T)}), ClusteringConfig(min_count=100))
        above = derive_sense_anchors(make_collection(3, {"w": (T, T)}), ClusteringConfig(min_count=99))
        assert len(at) == 1 and len(above) == 2

    def test_supports_sum_and_order(self, rng):
        groups = {t: (rng.standard_normal((150, 4)), rng.standard_normal((150, 4))) for t in ["b", "a", "c"]}
        out = derive_sense_anchors(make_collection(4, groups), ClusteringConfig())
        assert [e.type for e in out] == sorted(e.type for e in out)
        for t, n in out.senses_per_type().items():
            assert sum(e.support for e in out if e.type == t) == 150
            assert all(e.support >= 5 for e in out if e.type == t)

    def test_small_clusters_merged(self, rng):
        # 3 outliers far away: a k=2 split would leave a 3-point cluster
        T = np.concatenate([rng.standard_normal((120, 2)) * 0.01, np.full((3, 2), 50.0)])
        out = derive_sense_anchors(make_collection(2, {"w": (T, T)}), ClusteringConfig(min_cluster_size=5))
        assert len(out) == 1 and out.entries[0].support == 123

    def test_empty(self):
        with pytest.raises(EmptyCollection):
            derive_sense_anchors(TypeCollection(3), ClusteringConfig())

    def test_config_validation(self):
        with pytest.raises(ValueError):
            ClusteringConfig(k_min=5, k_max=2)
        with pytest.raises(ValueError):
            ClusteringConfig(min_count=0)
