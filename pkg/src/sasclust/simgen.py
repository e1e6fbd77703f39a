"""Seeded synthetic benchmarks with a sparse cluster signal.

Five families, all with balanced groups of ``m`` items and the cluster
signal confined to the leading block of features:

``identity``
    three groups ``N(mu, I)``, ``N(0, I)``, ``N(-mu, I)`` where ``mu`` carries
    ``signal`` on the first 50 coordinates.
``same_cov``
    group means ``1.02, 1.04, ..., 2.00`` on the first 50 coordinates shifted
    by ``0``, ``signal`` and ``2 * signal``; one diagonal covariance with
    entries drawn from ``U[1, 5]``.
``diff_cov``
    same means; group ``g`` has its own diagonal covariance with entries from
    ``U[g, g + 1]``.
``categorical``
    binary features, success probability ``signal`` on a group-specific block
    of five features (1-5, 6-10, 11-15) and 0.1 elsewhere.
``varying_kappa``
    ``n_clusters`` centers drawn from ``N(0, 0.4 I)`` on the first 50
    coordinates, zero elsewhere, identity covariance.

Feature indices are 0-based here.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import ConstantColumn

__all__ = [
    "FAMILIES",
    "SimulationSpec",
    "LabeledDataset",
    "generate",
    "gen_identity",
    "gen_same_cov",
    "gen_diff_cov",
    "gen_categorical",
    "gen_varying_kappa",
    "standardize",
]

SIGNAL_WIDTH = 50
CATEGORICAL_BLOCK = 5
NOISE_RATE = 0.1
CENTER_VARIANCE = 0.4

FAMILIES = ("identity", "same_cov", "diff_cov", "categorical", "varying_kappa")


@dataclass(frozen=True)
class SimulationSpec:
    family: str = "identity"
    p: int = 500
    n_clusters: int = 3
    m: int = 30
    signal: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; choose from {FAMILIES}")
        if self.p < 1 or self.m < 1 or self.n_clusters < 2:
            raise ValueError("need p >= 1, m >= 1 and n_clusters >= 2")
        if self.family == "categorical" and not 0 <= self.signal <= 1:
            raise ValueError("categorical signal is a probability in [0, 1]")


@dataclass
class LabeledDataset:
    X: np.ndarray
    truth: np.ndarray
    true_features: np.ndarray
    spec: SimulationSpec = None

    @property
    def n(self):
        return self.X.shape[0]


def _require(spec, n_clusters=None, min_p=1, max_clusters=None):
    if n_clusters is not None and spec.n_clusters != n_clusters:
        raise ValueError(f"family {spec.family!r} has exactly {n_clusters} clusters")
    if spec.p < min_p:
        raise ValueError(f"family {spec.family!r} needs p >= {min_p}")
    if max_clusters is not None and spec.n_clusters > max_clusters:
        raise ValueError(f"family {spec.family!r} supports at most {max_clusters} clusters")


def _truth(k, m):
    return np.repeat(np.arange(k), m)


def _gaussian(rng, means, sds, m):
    # means, sds: (k, p); draws m rows per group, group by group
    k, p = means.shape
    noise = rng.standard_normal((k, m, p))
    return (means[:, None, :] + sds[:, None, :] * noise).reshape(k * m, p)


def _stepped_means(p, shift):
    width = min(SIGNAL_WIDTH, p)
    base = np.zeros(p)
    base[:width] = 1.0 + 0.02 * np.arange(1, width + 1)
    means = np.tile(base, (3, 1))
    for g in range(3):
        means[g, :width] += g * shift
    return means


def gen_identity(spec):
    _require(spec, n_clusters=3)
    rng = np.random.default_rng(spec.seed)
    width = min(SIGNAL_WIDTH, spec.p)
    mu = np.zeros(spec.p)
    mu[:width] = spec.signal
    means = np.stack([mu, np.zeros(spec.p), -mu])
    X = _gaussian(rng, means, np.ones_like(means), spec.m)
    return LabeledDataset(X, _truth(3, spec.m), np.arange(width), spec)


def gen_same_cov(spec):
    _require(spec, n_clusters=3, min_p=SIGNAL_WIDTH)
    rng = np.random.default_rng(spec.seed)
    var = rng.uniform(1.0, 5.0, size=spec.p)
    sds = np.tile(np.sqrt(var), (3, 1))
    X = _gaussian(rng, _stepped_means(spec.p, spec.signal), sds, spec.m)
    return LabeledDataset(X, _truth(3, spec.m), np.arange(SIGNAL_WIDTH), spec)


def gen_diff_cov(spec):
    _require(spec, n_clusters=3, min_p=SIGNAL_WIDTH)
    rng = np.random.default_rng(spec.seed)
    lows = np.arange(1.0, 4.0)[:, None]
    var = rng.uniform(lows, lows + 1.0, size=(3, spec.p))
    X = _gaussian(rng, _stepped_means(spec.p, spec.signal), np.sqrt(var), spec.m)
    return LabeledDataset(X, _truth(3, spec.m), np.arange(SIGNAL_WIDTH), spec)


def gen_categorical(spec):
    _require(spec, n_clusters=3, min_p=3 * CATEGORICAL_BLOCK)
    rng = np.random.default_rng(spec.seed)
    prob = np.full((3, spec.p), NOISE_RATE)
    for g in range(3):
        prob[g, g * CATEGORICAL_BLOCK:(g + 1) * CATEGORICAL_BLOCK] = spec.signal
    draws = rng.random((3, spec.m, spec.p)) < prob[:, None, :]
    X = draws.reshape(3 * spec.m, spec.p).astype(np.int64)
    return LabeledDataset(
        X, _truth(3, spec.m), np.arange(3 * CATEGORICAL_BLOCK), spec
    )


def gen_varying_kappa(spec):
    _require(spec, min_p=SIGNAL_WIDTH, max_clusters=10)
    rng = np.random.default_rng(spec.seed)
    k = spec.n_clusters
    means = np.zeros((k, spec.p))
    means[:, :SIGNAL_WIDTH] = rng.normal(
        0.0, np.sqrt(CENTER_VARIANCE), size=(k, SIGNAL_WIDTH)
    )
    X = _gaussian(rng, means, np.ones_like(means), spec.m)
    return LabeledDataset(X, _truth(k, spec.m), np.arange(SIGNAL_WIDTH), spec)


_GENERATORS = {
    "identity": gen_identity,
    "same_cov": gen_same_cov,
    "diff_cov": gen_diff_cov,
    "categorical": gen_categorical,
    "varying_kappa": gen_varying_kappa,
}


def generate(spec):
    """Draw the dataset described by ``spec``."""
    return _GENERATORS[spec.family](spec)


def standardize(X):
    """Center every column and scale it to unit sample variance (divisor n-1)."""
    X = np.asarray(X, dtype=np.float64)
    centered = X - X.mean(axis=0)
    sd = np.sqrt(np.einsum("ij,ij->j", centered, centered) / (X.shape[0] - 1))
    bad = np.flatnonzero(~(sd > 0))
    if bad.size:
        raise ConstantColumn(int(bad[0]))
    return centered / sd
