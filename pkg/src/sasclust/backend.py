"""Base clusterers used inside the alternation.

Two backends are provided: Lloyd's K-means with k-means++ seeding for
coordinate data, and K-medoids (Voronoi iteration followed by PAM exchange
steps) for arbitrary dissimilarity matrices. Both keep the best of several
seeded restarts and break ties between restarts by the lowest restart index.
Restarts run as one vectorized batch whose starting points all come from a
single generator seeded by ``seed``.

Returned labels are canonical: cluster ids are numbered in order of first
appearance along the item axis.
"""

from dataclasses import dataclass

import numpy as np

from .dissim import DissimilarityStack, check_features, subset_sum
from .exceptions import TooFewItems

__all__ = [
    "ClustererConfig",
    "ClusterCenters",
    "derive_seed",
    "canonical_labels",
    "kmeans",
    "kmeans_fit",
    "kmeans_1d",
    "kmedoids",
    "kmedoids_fit",
    "cluster",
]

_SEED_MASK = (1 << 64) - 1


def derive_seed(seed, *keys):
    """Deterministically derive a 64-bit child seed from ``seed`` and ``keys``."""
    entropy = [int(seed) & _SEED_MASK] + [int(k) & _SEED_MASK for k in keys]
    state = np.random.SeedSequence(entropy).generate_state(2, dtype=np.uint32)
    return int(state[0]) << 32 | int(state[1])


def _rng(seed, *keys):
    return np.random.default_rng(
        np.random.SeedSequence([int(seed) & _SEED_MASK] + [int(k) for k in keys])
    )


@dataclass(frozen=True)
class ClustererConfig:
    """Settings for the base clusterer.

    ``kind`` is ``"kmeans"`` or ``"kmedoids"``; ``tol`` is the relative
    objective decrease below which Lloyd iterations stop.
    """

    kind: str = "kmeans"
    restarts: int = 10
    max_iter: int = 100
    seed: int = 0
    tol: float = 1e-6

    def __post_init__(self):
        if self.kind not in ("kmeans", "kmedoids"):
            raise ValueError(f"unknown clusterer kind {self.kind!r}")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if not self.tol > 0:
            raise ValueError("tol must be > 0")


@dataclass(frozen=True)
class ClusterCenters:
    """K-means centroids (``means``) or K-medoids item indices (``medoids``)."""

    means: np.ndarray = None
    medoids: np.ndarray = None


def canonical_labels(labels):
    """Renumber labels by order of first appearance."""
    labels = np.asarray(labels)
    _, first = np.unique(labels, return_index=True)
    order = np.argsort(first, kind="stable")
    remap = np.empty(order.size, dtype=np.intp)
    remap[order] = np.arange(order.size)
    _, codes = np.unique(labels, return_inverse=True)
    return remap[codes.reshape(-1)]


def _check_k(n, k):
    if k < 1:
        raise ValueError("number of clusters must be >= 1")
    if k > n:
        raise TooFewItems(f"cannot form {k} clusters from {n} items")


def _sq_dist(X, centers):
    # centers: (r, k, d) -> (r, n, k)
    xsq = np.einsum("nd,nd->n", X, X)
    csq = np.einsum("rkd,rkd->rk", centers, centers)
    d2 = xsq[None, :, None] - 2.0 * (X @ centers.transpose(0, 2, 1)) + csq[:, None, :]
    return np.maximum(d2, 0.0)


def _kmeans_plusplus(X, k, restarts, rng):
    """k-means++ seeding for ``restarts`` independent draws at once."""
    n = X.shape[0]
    chosen = np.empty((restarts, k), dtype=np.intp)
    chosen[:, 0] = rng.integers(n, size=restarts)
    d2 = _sq_dist(X, X[chosen[:, :1]])[:, :, 0]
    for c in range(1, k):
        total = d2.sum(axis=1)
        u = rng.random(restarts) * total
        idx = np.argmax(np.cumsum(d2, axis=1) > u[:, None], axis=1)
        # all points already covered (duplicates): take any unchosen item
        for r in np.flatnonzero(~(total > 0)):
            idx[r] = np.setdiff1d(np.arange(n), chosen[r, :c])[0]
        chosen[:, c] = idx
        d2 = np.minimum(d2, _sq_dist(X, X[idx][:, None, :])[:, :, 0])
    return X[chosen], chosen


def _one_hot(labels, k):
    return (labels[..., None] == np.arange(k)).astype(np.float64)


def _repair_empty(labels, d2_own, k):
    # move the farthest point of a multi-member cluster into each empty one
    counts = np.bincount(labels, minlength=k)
    for c in np.flatnonzero(counts == 0):
        movable = counts[labels] > 1
        cand = np.where(movable, d2_own, -np.inf)
        i = int(np.argmax(cand))
        counts[labels[i]] -= 1
        labels[i] = c
        counts[c] = 1
        d2_own[i] = 0.0
    return labels


def _lloyd(X, centers, max_iter, tol, history=None):
    """Lloyd iterations for a batch of restarts.

    ``centers`` has shape ``(r, k, d)``. Each restart stops on its own when
    its labels repeat or its objective improves by less than ``tol``
    relative; finished restarts are frozen. Returns labels ``(r, n)`` and
    objectives ``(r,)``.
    """
    r, k, _ = centers.shape
    n = X.shape[0]
    centers = centers.copy()
    labels = np.full((r, n), -1, dtype=np.intp)
    xsq_total = float(np.einsum("nd,nd->", X, X))
    objective = np.full(r, np.inf)
    active = np.ones(r, dtype=bool)
    for _ in range(max_iter):
        idx = np.flatnonzero(active)
        d2 = _sq_dist(X, centers[idx])
        lab = np.argmin(d2, axis=2)
        H = _one_hot(lab, k)
        counts = H.sum(axis=1)
        for j in np.flatnonzero(np.any(counts == 0, axis=1)):
            own = d2[j, np.arange(n), lab[j]]
            lab[j] = _repair_empty(lab[j], own.copy(), k)
            H[j] = _one_hot(lab[j], k)
            counts[j] = H[j].sum(axis=0)
        new_centers = (H.transpose(0, 2, 1) @ X) / counts[:, :, None]
        # sum_i |x_i - c_(i)|^2 = sum_i |x_i|^2 - sum_k n_k |c_k|^2 at the centroids
        obj = xsq_total - np.einsum("rk,rkd,rkd->r", counts, new_centers, new_centers)
        obj = np.maximum(obj, 0.0)
        prev = objective[idx]
        done = np.all(lab == labels[idx], axis=1) | (
            np.isfinite(prev) & (prev - obj <= tol * prev)
        )
        labels[idx] = lab
        centers[idx] = new_centers
        objective[idx] = obj
        if history is not None:
            for j, rr in enumerate(idx):
                history[rr].append(float(obj[j]))
        active[idx[done]] = False
        if not active.any():
            break
    return labels, objective


def kmeans_fit(X, n_clusters, cfg=None, history=None):
    """Best-of-restarts Lloyd K-means.

    Returns ``(labels, centers, objective)`` where ``objective`` is the within
    cluster sum of squares. If ``history`` is a list, it receives one list of
    per-iteration objectives for each restart.
    """
    cfg = cfg or ClustererConfig()
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    n = X.shape[0]
    _check_k(n, n_clusters)
    offset = X.mean(axis=0)
    X = X - offset
    rng = _rng(cfg.seed)
    init, _ = _kmeans_plusplus(X, n_clusters, cfg.restarts, rng)
    trace = [[] for _ in range(cfg.restarts)] if history is not None else None
    labels, objective = _lloyd(X, init, cfg.max_iter, cfg.tol, trace)
    if history is not None:
        history.extend(trace)
    best = int(np.argmin(objective))
    labels = canonical_labels(labels[best])
    centers = (_one_hot(labels, n_clusters).T @ X) / np.bincount(labels)[:, None]
    centers += offset
    return labels, ClusterCenters(means=centers), float(objective[best])


def kmeans(X, n_clusters, cfg=None):
    """Cluster the rows of ``X`` into ``n_clusters`` groups with K-means."""
    return kmeans_fit(X, n_clusters, cfg)[0]


def kmeans_1d(X, n_clusters):
    """Exact K-means on every column of ``X`` separately.

    One-dimensional K-means is solved to global optimality by dynamic
    programming over the sorted values (optimal clusters are contiguous
    intervals). Returns ``(labels, wcss)`` with ``labels`` of shape ``(p, n)``
    and ``wcss`` of shape ``(p,)``.
    """
    X = np.asarray(X, dtype=np.float64)
    n, p = X.shape
    _check_k(n, n_clusters)
    labels = np.empty((p, n), dtype=np.intp)
    wcss = np.empty(p)
    # bound the (chunk, n+1, n+1) work arrays to a few million entries
    chunk = max(1, 2_000_000 // ((n + 1) * (n + 1)))
    for start in range(0, p, chunk):
        cols = X[:, start:start + chunk].T
        lab, cost = _kmeans_1d_block(cols, n_clusters)
        labels[start:start + chunk] = lab
        wcss[start:start + chunk] = cost
    return labels, wcss


def _kmeans_1d_block(cols, k):
    q, n = cols.shape
    order = np.argsort(cols, axis=1, kind="stable")
    v = np.take_along_axis(cols, order, axis=1)
    v = v - v.mean(axis=1, keepdims=True)
    s1 = np.concatenate([np.zeros((q, 1)), np.cumsum(v, axis=1)], axis=1)
    s2 = np.concatenate([np.zeros((q, 1)), np.cumsum(v * v, axis=1)], axis=1)
    # seg[:, i, j]: sum of squares of sorted items i..j-1 about their mean
    i = np.arange(n + 1)[:, None]
    j = np.arange(n + 1)[None, :]
    width = np.where(j > i, j - i, 1)
    seg = (s2[:, None, :] - s2[:, :, None]) - (
        s1[:, None, :] - s1[:, :, None]
    ) ** 2 / width
    seg = np.maximum(seg, 0.0)
    seg[:, ~(j > i)] = np.inf

    cost = seg[:, 0, :].copy()
    back = np.zeros((k, q, n + 1), dtype=np.intp)
    for c in range(1, k):
        cand = cost[:, :, None] + seg
        back[c] = np.argmin(cand, axis=1)
        cost = np.take_along_axis(cand, back[c][:, None, :], axis=1)[:, 0, :]

    sorted_labels = np.empty((q, n), dtype=np.intp)
    end = np.full(q, n)
    rows = np.arange(q)
    for c in range(k - 1, -1, -1):
        begin = back[c][rows, end] if c > 0 else np.zeros(q, dtype=np.intp)
        for r in range(q):
            sorted_labels[r, begin[r]:end[r]] = c
        end = begin
    labels = np.empty_like(sorted_labels)
    np.put_along_axis(labels, order, sorted_labels, axis=1)
    labels = np.array([canonical_labels(row) for row in labels])
    return labels, cost[:, n]


def _alternate(D, medoids, max_iter, history=None):
    # Voronoi iteration: assign to the nearest medoid, then move every medoid
    # to the member with the smallest summed dissimilarity to its cluster
    n = D.shape[0]
    r, k = medoids.shape
    batch = np.arange(r)[:, None]
    medoids = np.sort(medoids, axis=1)
    active = np.ones(r, dtype=bool)
    for _ in range(max_iter):
        # argmin keeps the first minimum, i.e. the lowest medoid index
        labels = np.argmin(D[:, medoids].transpose(1, 0, 2), axis=2)
        labels[batch, medoids] = np.arange(k)
        cost = D[np.arange(n), np.take_along_axis(medoids, labels, axis=1)].sum(axis=1)
        if history is not None:
            for j in np.flatnonzero(active):
                history[j].append(float(cost[j]))
        H = labels[:, :, None] == np.arange(k)
        within = np.where(H, D @ H, np.inf)
        new = np.sort(np.argmin(within, axis=1), axis=1)
        active &= (new != medoids).any(axis=1)
        medoids = new
        if not active.any():
            break
    return labels, medoids, cost


def _best_swap(D, medoids, cost):
    # best single exchange of a medoid for a non-medoid, per restart
    r, k = medoids.shape
    n = D.shape[0]
    d = D[:, medoids].transpose(1, 0, 2)
    others = np.empty((r, k, n))
    for c in range(k):
        rest = np.delete(d, c, axis=2)
        others[:, c] = rest.min(axis=2) if k > 1 else np.inf
    swapped = np.minimum(others[:, :, :, None], D[None, None]).sum(axis=2)
    batch = np.arange(r)[:, None]
    swapped[batch, :, medoids] = np.inf
    flat = swapped.reshape(r, -1)
    pick = np.argmin(flat, axis=1)
    gain = cost - flat[np.arange(r), pick]
    improved = gain > 1e-12 * np.maximum(np.abs(cost), 1.0)
    medoids = medoids.copy()
    slot, item = np.divmod(pick, n)
    medoids[improved, slot[improved]] = item[improved]
    return medoids, improved


def _pam(D, medoids, max_iter, history=None):
    """K-medoids for a batch of restarts, ``medoids`` of shape ``(r, k)``.

    Every restart runs Voronoi iteration to a fixed point. The cheapest one
    is then polished: the best improving medoid/non-medoid exchange is
    applied and the iteration resumes, until no exchange lowers the cost.
    Ties go to the lowest index. Returns ``(labels, medoids, cost)`` of the
    polished restart.
    """
    labels, medoids, cost = _alternate(D, medoids, max_iter, history)
    best = int(np.argmin(cost))
    labels, medoids, cost = labels[best:best + 1], medoids[best:best + 1], cost[best:best + 1]
    trace = [history[best]] if history is not None else None
    for _ in range(max_iter):
        medoids, improved = _best_swap(D, medoids, cost)
        if not improved.any():
            break
        labels, medoids, cost = _alternate(D, medoids, max_iter, trace)
    return labels[0], medoids[0], float(cost[0])


def kmedoids_fit(D, n_clusters, cfg=None, history=None):
    """Best-of-restarts K-medoids on a dissimilarity matrix.

    Returns ``(labels, centers, objective)``; the objective is the total
    dissimilarity of every item to its medoid. All restarts draw their
    starting medoids (distinct items, uniformly) from one generator seeded by
    ``cfg.seed``; ties between restarts go to the lowest index.
    """
    cfg = cfg or ClustererConfig(kind="kmedoids")
    D = np.asarray(D, dtype=np.float64)
    if D.ndim != 2 or D.shape[0] != D.shape[1]:
        raise ValueError("dissimilarity matrix must be square")
    n = D.shape[0]
    _check_k(n, n_clusters)
    keys = _rng(cfg.seed).random((cfg.restarts, n))
    init = np.argsort(keys, axis=1)[:, :n_clusters]
    trace = [[] for _ in range(cfg.restarts)] if history is not None else None
    labels, medoids, cost = _pam(D, init, cfg.max_iter, trace)
    if history is not None:
        history.extend(trace)
    canon = canonical_labels(labels)
    # reorder medoids to follow the canonical numbering
    ordered = np.empty_like(medoids)
    ordered[canon[medoids]] = medoids
    return canon, ClusterCenters(medoids=ordered), cost


def kmedoids(D, n_clusters, cfg=None):
    """Cluster items of a dissimilarity matrix into ``n_clusters`` groups."""
    return kmedoids_fit(D, n_clusters, cfg)[0]


def _pairwise_sq(X):
    sq = np.einsum("ij,ij->i", X, X)
    D = sq[:, None] + sq[None, :] - 2.0 * X @ X.T
    np.fill_diagonal(D, 0.0)
    return np.maximum(D, 0.0)


def cluster(data, features, n_clusters, cfg=None):
    """Cluster on the subset dissimilarity of ``features``.

    ``data`` is either a coordinate matrix (rows are items) or a
    :class:`DissimilarityStack`. Coordinate data goes to K-means on the
    selected columns unless ``cfg.kind`` asks for K-medoids; stacks always go
    to K-medoids on the summed slices.
    """
    cfg = cfg or ClustererConfig()
    if isinstance(data, DissimilarityStack):
        if cfg.kind != "kmedoids":
            raise ValueError("dissimilarity stacks require the kmedoids backend")
        return kmedoids(subset_sum(data, features), n_clusters, cfg)
    X = np.asarray(data, dtype=np.float64)
    idx = check_features(features, X.shape[1])
    if cfg.kind == "kmeans":
        return kmeans(X[:, idx], n_clusters, cfg)
    return kmedoids(_pairwise_sq(X[:, idx]), n_clusters, cfg)
