import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nearfocus.errors import DomainError
from nearfocus.kmeans import assign, lloyd


def brute_force_optimum(points, k):
    """Smallest within-cluster SSE over every assignment of points to k labels."""
    n = len(points)
    labels = np.array(list(itertools.product(range(k), repeat=n)))  # (k^n, n)
    total = np.zeros(len(labels))
    for j in range(k):
        mask = labels == j
        cnt = mask.sum(axis=1)
        sx = mask @ points[:, 0]
        sy = mask @ points[:, 1]
        sq = mask @ (points ** 2).sum(axis=1)
        with np.errstate(invalid="ignore", divide="ignore"):
            sse = sq - np.where(cnt > 0, (sx ** 2 + sy ** 2) / cnt, 0.0)
        total += sse
    best = np.argmin(total)
    return total[best], labels[best]


@pytest.fixture
def blobs():
    rng = np.random.default_rng(4)
    centers = np.array([[0.0, 0.0], [10.0, 0.0], [5.0, 9.0]])
    return np.concatenate([c + rng.normal(scale=0.7, size=(4, 2)) for c in centers])


def test_matches_exhaustive_optimum(blobs):
    best_sse, _ = brute_force_optimum(blobs, 3)
    res = lloyd(blobs, 3, seed=0)
    assert res.objective == pytest.approx(best_sse, rel=1e-9)


def test_k_equals_points_gives_points():
    pts = np.array([[0.0, 1.0], [2.0, 2.0], [5.0, -1.0], [3.0, 3.0]])
    res = lloyd(pts, 4, seed=9)
    assert res.objective == 0.0
    assert sorted(map(tuple, res.centroids)) == sorted(map(tuple, pts))


def test_single_cluster_is_mean():
    res = lloyd(np.array([[0.0, 1.0], [0.0, 3.0]]), 1)
    np.testing.assert_array_equal(res.centroids, [[0.0, 2.0]])


def test_too_many_clusters_rejected():
    pts = np.array([[0.0, 0.0], [0.0, 0.0], [1.0, 1.0]])
    with pytest.raises(DomainError):
        lloyd(pts, 3)
    with pytest.raises(DomainError):
        lloyd(pts, 2, max_iter=0)


def test_duplicate_points_still_return_k_centroids():
    pts = np.array([[0.0, 0.0]] * 5 + [[1.0, 0.0]] * 3 + [[0.0, 1.0]])
    res = lloyd(pts, 3, seed=2)
    assert len(res.centroids) == 3 and res.objective == 0.0


def test_assign_ties_go_to_lowest_index():
    cents = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]])
    pts = np.array([[0.0, 0.0], [0.0, 0.5]])
    assert assign(pts, cents).tolist() == [0, 2]


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 32), st.integers(1, 8), st.integers(20, 200))
def test_objective_nonincreasing_and_means(seed, k, n):
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-5, 5, size=(n, 2))
    res = lloyd(pts, k, seed=seed)
    h = np.array(res.history)
    assert np.all(np.diff(h) <= 1e-12 * h[0])
    assert len(res.centroids) == k
    for j in range(k):
        members = pts[res.labels == j]
        assert len(members) > 0
        np.testing.assert_allclose(res.centroids[j], members.mean(axis=0), atol=1e-9, rtol=0)


def test_seed_determinism():
    pts = np.random.default_rng(1).uniform(size=(500, 2))
    a, b = lloyd(pts, 12, seed=77), lloyd(pts, 12, seed=77)
    np.testing.assert_array_equal(a.centroids, b.centroids)
    np.testing.assert_array_equal(a.labels, b.labels)


def test_empty_cluster_reseeded_at_farthest_point():
    from nearfocus.kmeans import _update
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [9.0, 0.0]])
    labels = np.array([0, 0, 0])
    cents = np.array([[0.0, 0.0], [100.0, 100.0]])
    new, new_labels = _update(pts, labels, 2, cents)
    assert new_labels.tolist() == [0, 0, 1]
    np.testing.assert_array_equal(new, [[0.5, 0.0], [9.0, 0.0]])
