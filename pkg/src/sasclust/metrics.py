"""Agreement between partitions and between feature sets."""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .exceptions import GroupCountMismatch, LengthMismatch

__all__ = [
    "EvalReport",
    "contingency",
    "rand_index",
    "symmetric_difference",
    "classification_error",
    "evaluate",
]


@dataclass(frozen=True)
class EvalReport:
    rand_index: float
    sym_diff: int = None
    runtime_seconds: float = None


def contingency(labels_a, labels_b):
    """Counts ``n_ij`` of items in group ``i`` of ``a`` and group ``j`` of ``b``."""
    a = np.asarray(labels_a).reshape(-1)
    b = np.asarray(labels_b).reshape(-1)
    if a.shape != b.shape:
        raise LengthMismatch(f"label vectors differ in length: {a.size} vs {b.size}")
    _, ia = np.unique(a, return_inverse=True)
    _, ib = np.unique(b, return_inverse=True)
    table = np.zeros((ia.max() + 1, ib.max() + 1), dtype=np.int64)
    np.add.at(table, (ia.reshape(-1), ib.reshape(-1)), 1)
    return table


def _pairs(x):
    x = np.asarray(x, dtype=np.int64)
    return int(np.sum(x * (x - 1) // 2))


def rand_index(labels_a, labels_b):
    """Fraction of unordered item pairs on which two partitions agree.

    A pair agrees when both partitions put it in the same group or both
    separate it. Defined as 1 for fewer than two items.
    """
    table = contingency(labels_a, labels_b)
    n = int(table.sum())
    total = n * (n - 1) // 2
    if total == 0:
        return 1.0
    together_both = _pairs(table)
    together_a = _pairs(table.sum(axis=1))
    together_b = _pairs(table.sum(axis=0))
    agree = total + 2 * together_both - together_a - together_b
    return agree / total


def symmetric_difference(features_a, features_b):
    """Number of features selected by exactly one of the two sets."""
    return len(set(np.asarray(features_a).tolist()) ^ set(np.asarray(features_b).tolist()))


def classification_error(labels, truth, n_clusters=None):
    """Misassigned fraction under the best one-to-one matching of labels.

    Predicted groups are matched to true groups so as to maximize the number
    of agreeing items (Hungarian algorithm); unmatched groups count as
    errors. ``n_clusters``, when given, caps the number of distinct labels
    allowed on either side.
    """
    table = contingency(labels, truth)
    if n_clusters is not None and max(table.shape) > n_clusters:
        raise GroupCountMismatch(
            f"labelings use {table.shape} groups, more than n_clusters={n_clusters}"
        )
    rows, cols = linear_sum_assignment(table, maximize=True)
    return 1.0 - table[rows, cols].sum() / table.sum()


def evaluate(labels, truth, features=None, true_features=None, runtime_seconds=None):
    sym = None
    if features is not None and true_features is not None:
        sym = symmetric_difference(features, true_features)
    return EvalReport(rand_index(labels, truth), sym, runtime_seconds)
