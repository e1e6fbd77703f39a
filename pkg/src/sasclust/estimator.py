"""scikit-learn compatible front end."""

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin, TransformerMixin
from sklearn.utils import check_random_state
from sklearn.utils.validation import check_array, check_is_fitted

from .backend import ClustererConfig
from .dissim import (
    DissimilarityStack,
    encode_categories,
    feature_scale,
    hamming_stack,
)
from .exceptions import ConstantColumn, ZeroFeature
from .sas import sas_cluster
from .simgen import standardize as _standardize
from .tuning import GapEvaluator, golden_section_search, grid_search


def _resolve_seed(random_state):
    if isinstance(random_state, (int, np.integer)):
        return int(random_state)
    return int(check_random_state(random_state).randint(np.iinfo(np.int32).max))


class SASClustering(ClusterMixin, TransformerMixin, BaseEstimator):
    """Sparse clustering by alternating feature selection and clustering.

    Parameters
    ----------
    n_clusters : int, default=3
        Number of clusters.
    n_features : int or None, default=None
        Number of features to keep. ``None`` selects it with the permutation
        gap statistic using ``tuning``.
    tuning : {"grid", "golden"}, default="grid"
        Search strategy over the number of features when ``n_features`` is
        None.
    grid_step : int, default=1
        Step of the grid ``1, 1 + grid_step, ...``.
    refine : bool, default=False
        After a coarse grid, rescan every value within ``grid_step - 1`` of
        the best one.
    n_perms : int, default=25
        Number of permuted reference datasets for the gap statistic.
    metric : {"euclidean", "hamming", "precomputed"}, default="euclidean"
        ``"euclidean"``: per-feature squared differences of numeric columns,
        clustered with K-means. ``"hamming"``: per-feature mismatch of
        categorical columns, clustered with K-medoids. ``"precomputed"``:
        ``X`` is a ``(p, n, n)`` stack of dissimilarities, clustered with
        K-medoids.
    standardize : bool, default=True
        Standardize numeric columns before clustering.
    drop_constant : bool, default=False
        Silently drop features with no variation instead of raising.
    restarts, max_iter, tol
        Backend restarts, iteration cap and relative tolerance.
    max_alt_iter : int, default=20
        Cap on the number of alternations.
    init : {"coordinate", "random"}, default="coordinate"
    gap_statistic : {"between", "within"}, default="between"
    random_state : int, RandomState or None, default=0

    Attributes
    ----------
    labels_ : ndarray of shape (n_samples,)
    features_ : ndarray
        Selected feature indices (0-based, relative to the input columns).
    n_selected_ : int
    objective_ : float
        Within-cluster dissimilarity of ``labels_`` on the selected features.
    gap_profile_ : GapProfile or None
    result_ : SasResult
    """

    def __init__(
        self,
        n_clusters=3,
        n_features=None,
        tuning="grid",
        grid_step=1,
        refine=False,
        n_perms=25,
        metric="euclidean",
        standardize=True,
        drop_constant=False,
        restarts=10,
        max_iter=100,
        tol=1e-6,
        max_alt_iter=20,
        init="coordinate",
        gap_statistic="between",
        random_state=0,
    ):
        self.n_clusters = n_clusters
        self.n_features = n_features
        self.tuning = tuning
        self.grid_step = grid_step
        self.refine = refine
        self.n_perms = n_perms
        self.metric = metric
        self.standardize = standardize
        self.drop_constant = drop_constant
        self.restarts = restarts
        self.max_iter = max_iter
        self.tol = tol
        self.max_alt_iter = max_alt_iter
        self.init = init
        self.gap_statistic = gap_statistic
        self.random_state = random_state

    def _prepare(self, X):
        if self.metric == "precomputed":
            entries = np.asarray(X, dtype=np.float64)
            stack = DissimilarityStack(entries).validate()
            totals = stack.entries.sum(axis=(1, 2))
            return stack, np.flatnonzero(totals > 0), "kmedoids"
        if self.metric == "hamming":
            X = check_array(X, dtype=None, ensure_min_samples=2)
            codes = encode_categories(X)
            varying = np.flatnonzero((codes != codes[0]).any(axis=0))
            return codes, varying, "kmedoids"
        if self.metric != "euclidean":
            raise ValueError(f"unknown metric {self.metric!r}")
        X = check_array(X, dtype=np.float64, ensure_min_samples=2)
        return X, np.flatnonzero(feature_scale(X) > 0), "kmeans"

    def fit(self, X, y=None):
        data, varying, kind = self._prepare(X)
        p = data.p if isinstance(data, DissimilarityStack) else data.shape[1]
        if varying.size < p:
            if not self.drop_constant:
                bad = int(np.setdiff1d(np.arange(p), varying)[0])
                if self.metric == "euclidean" and self.standardize:
                    raise ConstantColumn(bad)
                raise ZeroFeature(bad)
            if varying.size == 0:
                raise ZeroFeature(0, "every feature is constant")
        if isinstance(data, DissimilarityStack):
            data = DissimilarityStack(data.entries[varying])
        else:
            data = data[:, varying]
            if self.metric == "hamming":
                data = hamming_stack(data)
            elif self.standardize:
                data = _standardize(data)
        self.n_features_in_ = p
        self.kept_features_ = varying

        seed = _resolve_seed(self.random_state)
        cfg = ClustererConfig(
            kind=kind,
            restarts=self.restarts,
            max_iter=self.max_iter,
            seed=seed,
            tol=self.tol,
        )
        if self.n_features is not None:
            result = sas_cluster(
                data,
                self.n_clusters,
                self.n_features,
                cfg,
                max_alt_iter=self.max_alt_iter,
                init=self.init,
            )
            self.gap_profile_ = None
        else:
            evaluator = GapEvaluator(
                data,
                self.n_clusters,
                self.n_perms,
                cfg,
                seed,
                statistic=self.gap_statistic,
                max_alt_iter=self.max_alt_iter,
                init=self.init,
            )
            if self.tuning == "grid":
                tuned = grid_search(
                    None, self.n_clusters, self.grid_step,
                    refine=self.refine, evaluator=evaluator,
                )
            elif self.tuning == "golden":
                tuned = golden_section_search(None, self.n_clusters, evaluator=evaluator)
            else:
                raise ValueError(f"unknown tuning {self.tuning!r}")
            result = tuned.result
            self.gap_profile_ = tuned.profile
        self.result_ = result
        self.labels_ = result.labels
        self.features_ = varying[result.features]
        self.n_selected_ = result.s
        self.objective_ = result.objective
        self.n_iter_ = result.iterations
        self.converged_ = result.converged
        return self

    def get_support(self, indices=False):
        """Mask (or indices) of the selected input features."""
        check_is_fitted(self, "features_")
        if indices:
            return self.features_.copy()
        mask = np.zeros(self.n_features_in_, dtype=bool)
        mask[self.features_] = True
        return mask

    def transform(self, X):
        """Keep only the selected columns of ``X``."""
        check_is_fitted(self, "features_")
        if self.metric == "precomputed":
            return np.asarray(X)[self.features_]
        X = check_array(X, dtype=None)
        return X[:, self.features_]
