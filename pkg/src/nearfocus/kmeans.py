"""Lloyd's k-means with k-means++ seeding, deterministic for a given seed.

Assignment ties go to the lowest centroid index; cluster sums accumulate in
point order, so results do not depend on thread scheduling.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .errors import DomainError


@dataclass
class KMeansResult:
    centroids: np.ndarray
    labels: np.ndarray
    objective: float
    history: list
    iterations: int
    converged: bool


def _sq_dist(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    d = a - b
    return np.einsum("...i,...i->...", d, d)


def assign(points: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    """Index of the nearest centroid for every point, lowest index on ties."""
    k = len(centroids)
    if k == 1:
        return np.zeros(len(points), dtype=np.intp)
    tree = cKDTree(centroids)
    nn = min(k, 3)
    _, idx = tree.query(points, k=nn)
    # exact distances recomputed here so ties are judged consistently
    cand = _sq_dist(points[:, None, :], centroids[idx])
    best = cand.min(axis=1, keepdims=True)
    tied = cand == best
    return np.where(tied, idx, k).min(axis=1)


def objective(points: np.ndarray, centroids: np.ndarray, labels: np.ndarray) -> float:
    return float(np.sum(_sq_dist(points, centroids[labels])))


def kmeans_pp_init(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = len(points)
    chosen = [int(rng.integers(n))]
    d2 = _sq_dist(points, points[chosen[0]])
    for _ in range(1, k):
        total = d2.sum()
        if total <= 0:
            raise DomainError("fewer distinct points than clusters")
        cum = np.cumsum(d2)
        nxt = int(np.searchsorted(cum, rng.random() * cum[-1], side="right"))
        if nxt >= n:
            nxt = int(np.flatnonzero(d2 > 0)[-1])
        chosen.append(nxt)
        d2 = np.minimum(d2, _sq_dist(points, points[nxt]))
    return points[chosen].copy()


def _update(points, labels, k, centroids):
    counts = np.bincount(labels, minlength=k)
    empty = np.flatnonzero(counts == 0)
    if empty.size:
        # reseed each empty cluster at the point currently farthest from its centroid
        labels = labels.copy()
        dist = _sq_dist(points, centroids[labels])
        for j in empty:
            far = int(np.argmax(dist))
            labels[far] = j
            dist[far] = -1.0
        counts = np.bincount(labels, minlength=k)
    new = np.empty_like(centroids)
    for dim in range(points.shape[1]):
        new[:, dim] = np.bincount(labels, weights=points[:, dim], minlength=k) / counts
    return new, labels


def lloyd(points, k: int, seed: int = 0, max_iter: int = 100, tol: float = 1e-6) -> KMeansResult:
    """Cluster ``points`` (shape (M, D)) into exactly ``k`` groups.

    Stops when the objective's relative decrease falls below ``tol`` or after
    ``max_iter`` update steps. The returned centroids are the means of the
    returned labels.
    """
    x = np.asarray(points, dtype=float)
    if x.ndim != 2 or len(x) == 0:
        raise DomainError("points must be a nonempty (M, D) array")
    if k < 1:
        raise DomainError("k must be at least 1")
    if max_iter < 1 or tol < 0:
        raise DomainError("need max_iter >= 1 and tol >= 0")
    distinct = len(np.unique(x, axis=0))
    if k > distinct:
        raise DomainError(f"k={k} exceeds the {distinct} distinct points")

    rng = np.random.default_rng(np.random.SeedSequence(seed))
    centroids = kmeans_pp_init(x, k, rng)
    labels = assign(x, centroids)
    obj = objective(x, centroids, labels)
    history = [obj]
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        centroids, labels = _update(x, labels, k, centroids)
        new_labels = assign(x, centroids)
        new_obj = objective(x, centroids, new_labels)
        history.append(new_obj)
        stalled = np.array_equal(new_labels, labels)
        labels = new_labels
        if stalled or obj == 0 or (obj - new_obj) <= tol * obj:
            converged = True
            obj = new_obj
            break
        obj = new_obj
    centroids, labels = _update(x, labels, k, centroids)
    final = objective(x, centroids, labels)
    history.append(final)
    return KMeansResult(centroids, labels, final, history, it, converged)
