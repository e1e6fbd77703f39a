"""Per-feature dissimilarity stacks and within-cluster dissimilarity.

A stack holds one ``n x n`` dissimilarity matrix per feature, shape
``(p, n, n)``. All sums run over ordered pairs ``(i, j)``, so an unordered
pair contributes twice; with that convention a normalized slice sums to one
and the single-cluster within-cluster dissimilarity of a normalized slice is
``1 / n``.

For coordinate data the squared-difference stack never needs to be
materialized: ``sum_{i,j in k} (x_i - x_j)^2 = 2 |k| sum_{i in k} (x_i - m_k)^2``
so every quantity reduces to per-cluster sums of squares. The functions
prefixed ``coordinate_`` implement that route; the dense functions serve as
its reference.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import (
    DimensionMismatch,
    EmptyCluster,
    IndexOutOfRange,
    ZeroFeature,
)

__all__ = [
    "DissimilarityStack",
    "check_labels",
    "check_features",
    "normalize",
    "euclidean_stack",
    "hamming_stack",
    "wcd",
    "wcd_per_feature",
    "subset_sum",
    "feature_scale",
    "normalized_coordinates",
    "coordinate_wcd_per_feature",
    "encode_categories",
]


@dataclass(frozen=True)
class DissimilarityStack:
    """Dense tensor of per-feature dissimilarities, indexed ``(a, i, j)``."""

    entries: np.ndarray
    normalized: bool = False

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=np.float64)
        if entries.ndim != 3 or entries.shape[1] != entries.shape[2]:
            raise DimensionMismatch(
                f"stack must have shape (p, n, n), got {entries.shape}"
            )
        if entries.shape[0] < 1 or entries.shape[1] < 1:
            raise DimensionMismatch("stack needs at least one feature and one item")
        object.__setattr__(self, "entries", entries)

    @property
    def p(self):
        return self.entries.shape[0]

    @property
    def n(self):
        return self.entries.shape[1]

    def validate(self, atol=1e-12):
        """Check nonnegativity, symmetry and zero diagonal; return self."""
        e = self.entries
        if np.any(e < -atol):
            raise ValueError("dissimilarities must be nonnegative")
        if not np.allclose(e, e.transpose(0, 2, 1), rtol=0, atol=atol):
            raise ValueError("dissimilarity slices must be symmetric")
        if np.any(np.abs(np.diagonal(e, axis1=1, axis2=2)) > atol):
            raise ValueError("dissimilarity slices must have a zero diagonal")
        return self


def check_labels(labels, n_items=None, n_clusters=None):
    """Validate a cluster assignment and return it as ``(codes, n_clusters)``.

    Without ``n_clusters`` the distinct label values are re-encoded to
    ``0..k-1`` in sorted order. With ``n_clusters`` the labels must already be
    integers in ``[0, n_clusters)`` and every group must be non-empty.
    """
    labels = np.asarray(labels)
    if labels.ndim != 1:
        raise DimensionMismatch("labels must be one-dimensional")
    if n_items is not None and labels.shape[0] != n_items:
        raise DimensionMismatch(
            f"expected {n_items} labels, got {labels.shape[0]}"
        )
    if n_clusters is None:
        _, codes = np.unique(labels, return_inverse=True)
        codes = codes.reshape(-1).astype(np.intp)
        return codes, int(codes.max()) + 1 if codes.size else 0
    codes = labels.astype(np.intp)
    if np.any(codes != labels) or np.any(codes < 0) or np.any(codes >= n_clusters):
        raise IndexOutOfRange(f"labels must be integers in [0, {n_clusters})")
    counts = np.bincount(codes, minlength=n_clusters)
    if np.any(counts == 0):
        empty = np.flatnonzero(counts == 0).tolist()
        raise EmptyCluster(f"clusters {empty} have no members")
    return codes, n_clusters


def check_features(features, p):
    """Return ``features`` as a sorted array of distinct indices in ``[0, p)``."""
    idx = np.asarray(features, dtype=np.intp).reshape(-1)
    if np.any(idx < 0) or np.any(idx >= p):
        raise IndexOutOfRange(f"feature indices must lie in [0, {p})")
    uniq = np.unique(idx)
    if uniq.size != idx.size:
        raise IndexOutOfRange("feature indices must be distinct")
    return uniq


def _one_hot(codes, k):
    onehot = np.zeros((codes.shape[0], k))
    onehot[np.arange(codes.shape[0]), codes] = 1.0
    return onehot


def normalize(stack):
    """Scale every slice so that its entries sum to one over ordered pairs."""
    totals = stack.entries.sum(axis=(1, 2))
    zero = np.flatnonzero(totals <= 0)
    if zero.size:
        raise ZeroFeature(int(zero[0]))
    if stack.normalized:
        return stack
    return DissimilarityStack(stack.entries / totals[:, None, None], normalized=True)


def _as_2d(X):
    X = np.asarray(X)
    if X.ndim != 2:
        raise DimensionMismatch(f"expected a 2-d data matrix, got ndim={X.ndim}")
    n, p = X.shape
    if n < 2 or p < 1:
        raise DimensionMismatch(f"need n >= 2 items and p >= 1 features, got {X.shape}")
    return X


def euclidean_stack(X):
    """Squared coordinate differences, ``entries[a, i, j] = (x_ia - x_ja)^2``."""
    X = _as_2d(np.asarray(X, dtype=np.float64))
    diff = X.T[:, :, None] - X.T[:, None, :]
    return DissimilarityStack(diff * diff)


def hamming_stack(X):
    """Per-feature mismatch indicators for categorical data."""
    X = _as_2d(X)
    cols = X.T
    return DissimilarityStack(
        (cols[:, :, None] != cols[:, None, :]).astype(np.float64)
    )


def wcd(D, labels, n_clusters=None):
    """Within-cluster dissimilarity of a single ``n x n`` matrix.

    ``sum_k (1/|k|) sum_{i,j in k} D[i, j]`` over ordered pairs.
    """
    D = np.asarray(D, dtype=np.float64)
    if D.ndim != 2 or D.shape[0] != D.shape[1]:
        raise DimensionMismatch("dissimilarity matrix must be square")
    codes, k = check_labels(labels, D.shape[0], n_clusters)
    H = _one_hot(codes, k)
    within = np.einsum("ik,ij,jk->k", H, D, H)
    return float(np.sum(within / H.sum(axis=0)))


def wcd_per_feature(stack, labels, n_clusters=None):
    """Vector of within-cluster dissimilarities, one per slice."""
    codes, k = check_labels(labels, stack.n, n_clusters)
    H = _one_hot(codes, k)
    within = np.einsum("aik,ik->ak", stack.entries @ H, H)
    return within @ (1.0 / H.sum(axis=0))


def subset_sum(stack, features):
    """Elementwise sum of the slices indexed by ``features``."""
    idx = check_features(features, stack.p)
    return stack.entries[idx].sum(axis=0)


def feature_scale(X):
    """Total squared-difference dissimilarity of each column over ordered pairs."""
    X = _as_2d(np.asarray(X, dtype=np.float64))
    centered = X - X.mean(axis=0)
    return 2.0 * X.shape[0] * np.einsum("ij,ij->j", centered, centered)


def normalized_coordinates(X):
    """Rescale columns so their squared-difference slices are normalized.

    Columns are also centered, which leaves every dissimilarity unchanged.
    The returned matrix ``Z`` satisfies ``euclidean_stack(Z) ==
    normalize(euclidean_stack(X))`` up to rounding, so K-means on columns of
    ``Z`` targets the normalized subset dissimilarity directly.
    """
    X = _as_2d(np.asarray(X, dtype=np.float64))
    scale = feature_scale(X)
    zero = np.flatnonzero(scale <= 0)
    if zero.size:
        raise ZeroFeature(int(zero[0]))
    return (X - X.mean(axis=0)) / np.sqrt(scale)


def coordinate_wcd_per_feature(X, labels, n_clusters=None):
    """Per-feature within-cluster dissimilarity of the squared-difference stack.

    Equals ``wcd_per_feature(euclidean_stack(X), labels)`` without building the
    ``(p, n, n)`` tensor: twice the within-cluster sum of squares per column.
    """
    X = np.asarray(X, dtype=np.float64)
    codes, k = check_labels(labels, X.shape[0], n_clusters)
    H = _one_hot(codes, k)
    means = (H.T @ X) / H.sum(axis=0)[:, None]
    resid = X - means[codes]
    return 2.0 * np.einsum("ij,ij->j", resid, resid)


def encode_categories(X):
    """Map the values of every column to integer codes ``0..levels-1``."""
    X = np.asarray(X, dtype=object)
    codes = np.empty(X.shape, dtype=np.int64)
    for a in range(X.shape[1]):
        _, codes[:, a] = np.unique(X[:, a].astype(str), return_inverse=True)
    return codes
