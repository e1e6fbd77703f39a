"""Choosing the number of features with a permutation gap statistic.

For a candidate ``s`` the alternation is run on the data and on ``B``
reference datasets in which every feature has been permuted independently
across items, which keeps the marginals and destroys joint cluster
structure. The gap is

    gap(s) = log V_obs(s) - mean_b log V_perm_b(s)

where ``V`` is the clustering statistic selected by ``statistic``:

``"between"`` (default)
    between-cluster dissimilarity ``s / n - D_S[C]``. On a normalized stack
    ``s / n`` is the within-cluster dissimilarity of the one-cluster
    partition, so ``V`` is the part of the total ``S``-dissimilarity that the
    clustering explains. Large gaps mean more structure than chance.
``"within"``
    the within-cluster dissimilarity ``D_S[C]`` itself.

The ``B`` reference datasets are drawn once per evaluator and shared by every
``s``, so differences between neighbouring ``s`` are not swamped by
permutation noise.
"""

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .backend import ClustererConfig, derive_seed
from .dissim import DissimilarityStack
from .exceptions import DegenerateObjective
from .sas import n_features_of, prepare, sas_cluster, self_cluster_scores

logger = logging.getLogger(__name__)

__all__ = [
    "DEFAULT_PERMUTATIONS",
    "GapPoint",
    "GapProfile",
    "TuneResult",
    "GapEvaluator",
    "permute_within_features",
    "permute_stack",
    "gap_at",
    "grid",
    "grid_search",
    "golden_section_argmax",
    "golden_section_search",
]

DEFAULT_PERMUTATIONS = 25
INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class GapPoint:
    s: int
    obs_wcd: float
    obs: float
    gap: float
    perm_log_mean: float
    perm_log_sd: float


@dataclass
class GapProfile:
    """Gap statistic over the evaluated values of ``s`` (sorted)."""

    grid: np.ndarray
    obs_wcd: np.ndarray
    obs: np.ndarray
    perm_log_mean: np.ndarray
    perm_log_sd: np.ndarray
    gap: np.ndarray
    B: int
    statistic: str = "between"

    @classmethod
    def from_points(cls, points, B, statistic):
        points = sorted(points, key=lambda pt: pt.s)

        def col(name, dtype=np.float64):
            return np.array([getattr(pt, name) for pt in points], dtype=dtype)

        return cls(
            grid=col("s", np.int64),
            obs_wcd=col("obs_wcd"),
            obs=col("obs"),
            perm_log_mean=col("perm_log_mean"),
            perm_log_sd=col("perm_log_sd"),
            gap=col("gap"),
            B=B,
            statistic=statistic,
        )

    def __len__(self):
        return int(self.grid.size)

    def argmax(self):
        """Value of ``s`` with the largest gap; ties go to the smallest ``s``."""
        return int(self.grid[int(np.argmax(self.gap))])

    def has_significant_peak(self, n_sd=3.0):
        """Whether the top gap clears ``n_sd`` reference standard deviations."""
        i = int(np.argmax(self.gap))
        sd = self.perm_log_sd[i]
        if not np.isfinite(sd):
            return False
        return bool(self.gap[i] > n_sd * sd)

    def rows(self):
        """CSV rows: s, obs_wcd, gap, perm_log_mean, perm_log_sd, obs."""
        return [
            (int(s), float(w), float(g), float(m), float(sd), float(o))
            for s, w, g, m, sd, o in zip(
                self.grid, self.obs_wcd, self.gap,
                self.perm_log_mean, self.perm_log_sd, self.obs,
            )
        ]


@dataclass
class TuneResult:
    s_hat: int
    result: object
    profile: GapProfile
    method: str
    evaluated: list = field(default_factory=list)

    @property
    def features(self):
        return self.result.features

    @property
    def labels(self):
        return self.result.labels


def permute_within_features(X, seed):
    """Shuffle every column of ``X`` independently."""
    X = np.asarray(X)
    if X.shape[0] <= 1:
        return X.copy()
    rng = np.random.default_rng(derive_seed(seed))
    return rng.permuted(X, axis=0)


def permute_stack(stack, seed):
    """Null model for a stack: relabel items independently within each slice."""
    rng = np.random.default_rng(derive_seed(seed))
    out = np.empty_like(stack.entries)
    for a in range(stack.p):
        perm = rng.permutation(stack.n)
        out[a] = stack.entries[a][np.ix_(perm, perm)]
    return DissimilarityStack(out, normalized=stack.normalized)


def _log_stat(result, n, statistic):
    if statistic == "between":
        value = result.s / n - result.objective
    else:
        value = result.objective
    if not value > 0:
        raise DegenerateObjective(
            f"{statistic} dissimilarity is {value!r} at s={result.s}"
        )
    return value, math.log(value)


class GapEvaluator:
    """Memoized gap statistic ``s -> gap(s)`` for one dataset.

    Parameters
    ----------
    data : ndarray of shape (n, p) or DissimilarityStack
        Coordinate data or a dissimilarity stack, normalized on entry.
        Coordinate columns are permuted directly; since permuting a column
        keeps its values, re-standardizing or re-normalizing the reference
        data would change nothing.
    n_clusters : int
    B : int
        Number of reference datasets.
    cfg : ClustererConfig
        Backend settings for the observed data; reference dataset ``b`` uses
        a seed derived from ``(seed, b)``.
    seed : int
        Master seed for the reference datasets.
    """

    def __init__(
        self,
        data,
        n_clusters,
        B=DEFAULT_PERMUTATIONS,
        cfg=None,
        seed=0,
        statistic="between",
        max_alt_iter=20,
        init="coordinate",
    ):
        if B < 1:
            raise ValueError("B must be >= 1")
        if statistic not in ("between", "within"):
            raise ValueError(f"unknown statistic {statistic!r}")
        self.data = prepare(data)
        self.n_clusters = n_clusters
        self.B = B
        self.cfg = cfg or ClustererConfig()
        self.seed = seed
        self.statistic = statistic
        self.max_alt_iter = max_alt_iter
        self.init = init
        self.p = n_features_of(self.data)
        self.n = self.data.n if isinstance(self.data, DissimilarityStack) else self.data.shape[0]
        self.results = {}
        self.points = {}
        self._references = None
        self._scores = {}
        self._exact_init = (
            not isinstance(self.data, DissimilarityStack) and self.cfg.kind == "kmeans"
        )

    def _reference(self, b):
        if self._references is None:
            self._references = [None] * self.B
        if self._references[b] is None:
            seed_b = derive_seed(self.seed, 1, b)
            if isinstance(self.data, DissimilarityStack):
                self._references[b] = permute_stack(self.data, seed_b)
            else:
                self._references[b] = permute_within_features(self.data, seed_b)
        return self._references[b]

    def _init_scores(self, key, data, cfg):
        if self.init != "coordinate":
            return None
        if key != "obs" and self._exact_init:
            # exact 1-d scores depend only on each column's sorted values
            key = "obs"
            data = self.data
        if key not in self._scores:
            self._scores[key] = self_cluster_scores(data, self.n_clusters, cfg)
        return self._scores[key]

    def _run(self, key, data, s, cfg):
        return sas_cluster(
            data,
            self.n_clusters,
            s,
            cfg,
            max_alt_iter=self.max_alt_iter,
            init=self.init,
            init_scores=self._init_scores(key, data, cfg),
            prepared=True,
        )

    def point(self, s):
        s = int(s)
        if s in self.points:
            return self.points[s]
        if not 1 <= s <= self.p:
            raise ValueError(f"s must lie in [1, {self.p}], got {s}")
        observed = self._run("obs", self.data, s, self.cfg)
        self.results[s] = observed
        obs, log_obs = _log_stat(observed, self.n, self.statistic)
        logs = np.empty(self.B)
        for b in range(self.B):
            cfg_b = replace(self.cfg, seed=derive_seed(self.seed, 2, b))
            ref = self._run(b, self._reference(b), s, cfg_b)
            logs[b] = _log_stat(ref, self.n, self.statistic)[1]
        mean = float(logs.mean())
        sd = float(logs.std(ddof=1)) if self.B > 1 else float("nan")
        pt = GapPoint(s, observed.objective, obs, log_obs - mean, mean, sd)
        self.points[s] = pt
        return pt

    def __call__(self, s):
        return self.point(s).gap

    def profile(self):
        return GapProfile.from_points(self.points.values(), self.B, self.statistic)


def gap_at(data, n_clusters, s, B=DEFAULT_PERMUTATIONS, cfg=None, seed=0, **kwargs):
    """Gap statistic at a single ``s``; returns a :class:`GapPoint`."""
    return GapEvaluator(data, n_clusters, B, cfg, seed, **kwargs).point(s)


def grid(p, h):
    """Candidate sparsities ``1, 1 + h, 1 + 2h, ...`` not exceeding ``p``."""
    if not 1 <= h <= p:
        raise ValueError(f"grid step must lie in [1, {p}], got {h}")
    return list(range(1, p + 1, h))


def _best(evaluator, candidates):
    best_s, best_gap = None, -np.inf
    for s in sorted(candidates):
        pt = evaluator.points.get(s)
        if pt is not None and pt.gap > best_gap:
            best_s, best_gap = s, pt.gap
    if best_s is None:
        raise DegenerateObjective("no value of s produced a usable gap statistic")
    return best_s


def _evaluate(evaluator, s):
    try:
        return evaluator(s)
    except DegenerateObjective as exc:
        logger.warning("skipping s=%d: %s", s, exc)
        return -np.inf


def grid_search(
    data,
    n_clusters,
    h=1,
    B=DEFAULT_PERMUTATIONS,
    cfg=None,
    seed=0,
    refine=False,
    evaluator=None,
    **kwargs,
):
    """Maximize the gap over ``grid(p, h)``.

    With ``refine`` and ``h > 1`` a second pass evaluates every ``s`` within
    ``h - 1`` of the coarse maximizer. Returns a :class:`TuneResult` whose
    ``result`` is the stored observed-data run at the selected ``s``.
    """
    ev = evaluator or GapEvaluator(data, n_clusters, B, cfg, seed, **kwargs)
    for s in grid(ev.p, h):
        _evaluate(ev, s)
    s_hat = _best(ev, ev.points)
    if refine and h > 1:
        for s in range(max(1, s_hat - h + 1), min(ev.p, s_hat + h - 1) + 1):
            _evaluate(ev, s)
        s_hat = _best(ev, ev.points)
    return TuneResult(
        s_hat, ev.results[s_hat], ev.profile(), "grid", sorted(ev.points)
    )


def golden_section_argmax(f, lo, hi):
    """Maximize ``f`` over the integers in ``[lo, hi]`` assuming unimodality.

    Interior probes sit at golden-ratio positions rounded to integers; each
    step discards the part of the bracket beyond the worse probe, so the
    bracket shrinks by at least one. Values are memoized. Returns
    ``(argmax, evaluated)`` where ``evaluated`` maps every probed point to its
    value; ties go to the smallest argument.
    """
    lo, hi = int(lo), int(hi)
    if lo > hi:
        raise ValueError("empty search interval")
    memo = {}

    def value(x):
        if x not in memo:
            memo[x] = f(x)
        return memo[x]

    while hi - lo > 2:
        width = hi - lo
        c = min(max(lo + int(round((1.0 - INV_PHI) * width)), lo + 1), hi - 2)
        d = min(max(lo + int(round(INV_PHI * width)), c + 1), hi - 1)
        if value(c) >= value(d):
            hi = d
        else:
            lo = c
    for x in range(lo, hi + 1):
        value(x)
    best = max(sorted(memo), key=lambda x: (memo[x], -x))
    return best, memo


def golden_section_search(
    data,
    n_clusters,
    B=DEFAULT_PERMUTATIONS,
    cfg=None,
    seed=0,
    evaluator=None,
    **kwargs,
):
    """Golden-section maximization of the gap over ``s`` in ``[1, p]``."""
    ev = evaluator or GapEvaluator(data, n_clusters, B, cfg, seed, **kwargs)
    if ev.p < 4:
        raise ValueError("golden-section search needs p >= 4")
    golden_section_argmax(lambda s: _evaluate(ev, s), 1, ev.p)
    s_hat = _best(ev, ev.points)
    return TuneResult(
        s_hat, ev.results[s_hat], ev.profile(), "golden", sorted(ev.points)
    )
