"""Sparse alternate-sum clustering.

Given per-feature dissimilarities, a number of clusters and a number of
features ``s``, alternate between

1. clustering on the summed dissimilarity of the current feature set, and
2. replacing the feature set by the ``s`` features with the smallest
   within-cluster dissimilarity under that clustering,

until the feature set stops changing. The starting feature set is made of the
``s`` features whose own one-feature clustering leaves the least within
cluster dissimilarity.

Data is passed either as a coordinate matrix (squared coordinate differences
are the per-feature dissimilarities and never get materialized) or as a
:class:`~sasclust.dissim.DissimilarityStack`. Both are normalized on entry.
"""

import hashlib
import logging
from dataclasses import dataclass, field, replace

import numpy as np

from .backend import ClustererConfig, cluster, derive_seed, kmeans_1d, kmedoids
from .dissim import (
    DissimilarityStack,
    check_features,
    coordinate_wcd_per_feature,
    normalize,
    normalized_coordinates,
    wcd_per_feature,
)
from .exceptions import BadSparsity

logger = logging.getLogger(__name__)

__all__ = [
    "SasResult",
    "TraceEntry",
    "prepare",
    "n_features_of",
    "per_feature_wcd",
    "self_cluster_scores",
    "select_features",
    "sas_init",
    "sas_cluster",
    "feature_set_hash",
]


@dataclass(frozen=True)
class TraceEntry:
    iteration: int
    objective: float
    features_hash: str


@dataclass
class SasResult:
    """Outcome of one alternation run.

    ``features`` holds 0-based feature indices, ``labels`` the assignment and
    ``objective`` the within-cluster dissimilarity of ``labels`` on the summed
    normalized dissimilarity of ``features``. ``history`` keeps the
    ``(features, labels)`` pair reached at the end of every alternation.
    """

    features: np.ndarray
    labels: np.ndarray
    objective: float
    iterations: int
    converged: bool
    trace: list = field(default_factory=list)
    history: list = field(default_factory=list)

    @property
    def s(self):
        return int(self.features.size)


def feature_set_hash(features):
    idx = np.asarray(features, dtype=np.int64)
    return hashlib.blake2b(idx.tobytes(), digest_size=8).hexdigest()


def prepare(data):
    """Normalize coordinates or a stack; already-normalized stacks pass through."""
    if isinstance(data, DissimilarityStack):
        return normalize(data)
    return normalized_coordinates(data)


def n_features_of(data):
    if isinstance(data, DissimilarityStack):
        return data.p
    return np.asarray(data).shape[1]


def per_feature_wcd(data, labels):
    """Within-cluster dissimilarity of every feature under ``labels``."""
    if isinstance(data, DissimilarityStack):
        return wcd_per_feature(data, labels)
    return coordinate_wcd_per_feature(data, labels)


def self_cluster_scores(data, n_clusters, cfg=None):
    """Within-cluster dissimilarity of each feature clustered on its own.

    Coordinate data with the K-means backend uses the exact one-dimensional
    solver; everything else runs the configured backend on each slice, with a
    seed derived from the feature index.
    """
    cfg = cfg or ClustererConfig()
    if not isinstance(data, DissimilarityStack) and cfg.kind == "kmeans":
        _, wcss = kmeans_1d(data, n_clusters)
        return 2.0 * wcss
    p = n_features_of(data)
    scores = np.empty(p)
    for a in range(p):
        cfg_a = replace(cfg, seed=derive_seed(cfg.seed, 0, a))
        if isinstance(data, DissimilarityStack):
            labels = kmedoids(data.entries[a], n_clusters, cfg_a)
            scores[a] = wcd_per_feature(
                DissimilarityStack(data.entries[a:a + 1]), labels
            )[0]
        else:
            labels = cluster(data, [a], n_clusters, cfg_a)
            scores[a] = coordinate_wcd_per_feature(data[:, [a]], labels)[0]
    return scores


def select_features(scores, s):
    """Indices of the ``s`` smallest scores, ties to the lowest index, sorted."""
    scores = np.asarray(scores, dtype=np.float64)
    p = scores.size
    if not 1 <= s <= p:
        raise BadSparsity(f"s must lie in [1, {p}], got {s}")
    return np.sort(np.argsort(scores, kind="stable")[:s])


def sas_init(data, n_clusters, s, cfg=None):
    """Starting feature set: the ``s`` best self-clustered features."""
    return select_features(self_cluster_scores(prepare(data), n_clusters, cfg), s)


def _random_features(p, s, seed):
    rng = np.random.default_rng(derive_seed(seed, 1))
    return np.sort(rng.choice(p, size=s, replace=False))


def sas_cluster(
    data,
    n_clusters,
    s,
    cfg=None,
    max_alt_iter=20,
    init="coordinate",
    init_scores=None,
    prepared=False,
):
    """Run the alternation and return a :class:`SasResult`.

    Parameters
    ----------
    data : ndarray of shape (n, p) or DissimilarityStack
        Coordinates (squared differences per feature) or a dissimilarity
        stack. Normalized on entry unless ``prepared`` is true.
    n_clusters : int
    s : int
        Number of features to keep.
    cfg : ClustererConfig, optional
        Backend settings. Each alternation reseeds the backend with a seed
        derived from ``cfg.seed`` and the current feature set.
    max_alt_iter : int
        Cap on the number of alternations.
    init : {"coordinate", "random"} or array of feature indices
        ``"coordinate"`` starts from the best self-clustered features,
        ``"random"`` from a seeded uniform draw.
    init_scores : ndarray, optional
        Precomputed :func:`self_cluster_scores`, reused across calls.
    """
    cfg = cfg or ClustererConfig()
    if not prepared:
        data = prepare(data)
    p = n_features_of(data)
    if not 1 <= s <= p:
        raise BadSparsity(f"s must lie in [1, {p}], got {s}")
    if max_alt_iter < 1:
        raise ValueError("max_alt_iter must be >= 1")

    if isinstance(init, str) and init == "coordinate":
        if init_scores is None:
            init_scores = self_cluster_scores(data, n_clusters, cfg)
        features = select_features(init_scores, s)
    elif isinstance(init, str) and init == "random":
        features = _random_features(p, s, cfg.seed)
    else:
        features = check_features(init, p)
        if features.size != s:
            raise BadSparsity("initial feature set must have exactly s features")

    seen = [features]
    iterates = []
    trace = []
    converged = cycled = False
    for t in range(1, max_alt_iter + 1):
        # seed keyed on the feature set: clustering is a pure function of S
        cfg_t = replace(cfg, seed=derive_seed(cfg.seed, 2, *features))
        labels = cluster(data, features, n_clusters, cfg_t)
        scores = per_feature_wcd(data, labels)
        new = select_features(scores, s)
        objective = float(scores[new].sum())
        iterates.append((new, labels, objective))
        trace.append(TraceEntry(t, objective, feature_set_hash(new)))
        if np.array_equal(new, features):
            converged = True
            break
        if any(np.array_equal(new, old) for old in seen[:-1]):
            logger.info("feature sets cycle after %d alternations", t)
            cycled = True
            break
        seen.append(new)
        features = new

    final = min(iterates, key=lambda it: it[2]) if cycled else iterates[-1]
    return SasResult(
        features=final[0],
        labels=final[1],
        objective=final[2],
        iterations=len(iterates),
        converged=converged,
        trace=trace,
        history=[(f, lab) for f, lab, _ in iterates],
    )
