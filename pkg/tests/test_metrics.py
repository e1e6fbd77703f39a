import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import error_by_permutations, rand_pairs
from sasclust.exceptions import GroupCountMismatch, LengthMismatch
from sasclust.metrics import (
    classification_error,
    contingency,
    evaluate,
    rand_index,
    symmetric_difference,
)


class TestRandIndex:
    def test_identical(self):
        labels = [0, 1, 1, 2, 0]
        assert rand_index(labels, labels) == 1.0

    def test_three_items(self):
        assert rand_index([0, 0, 1], [0, 1, 1]) == pytest.approx(1 / 3)

    def test_pair_enumeration_oracle(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            n = int(rng.integers(1, 11))
            a = rng.integers(0, 4, n)
            b = rng.integers(0, 4, n)
            assert rand_index(a, b) == pytest.approx(rand_pairs(list(a), list(b)), abs=1e-12)

    @given(st.lists(st.integers(0, 3), min_size=2, max_size=12), st.integers(0, 10_000))
    def test_symmetric_and_relabel_invariant(self, a, seed):
        rng = np.random.default_rng(seed)
        a = np.array(a)
        b = rng.integers(0, 3, a.size)
        relabel = rng.permutation(4)
        assert rand_index(a, b) == rand_index(b, a)
        assert rand_index(relabel[a], b) == rand_index(a, b)

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            rand_index([0, 1], [0, 1, 1])

    def test_string_labels(self):
        assert rand_index(["x", "y", "y"], [1, 2, 2]) == 1.0


class TestSymmetricDifference:
    def test_equal(self):
        assert symmetric_difference([1, 2], [2, 1]) == 0

    def test_disjoint(self):
        assert symmetric_difference([0, 1, 2], [3, 4, 5]) == 6

    def test_overlap(self):
        assert symmetric_difference([1, 2, 3], [2, 3, 4, 5]) == 3

    def test_triangle_inequality_exhaustive(self):
        subsets = [
            set(c) for r in range(5) for c in itertools.combinations(range(4), r)
        ]
        for a in subsets:
            for b in subsets:
                for c in subsets:
                    assert symmetric_difference(list(a), list(c)) <= (
                        symmetric_difference(list(a), list(b))
                        + symmetric_difference(list(b), list(c))
                    )


class TestClassificationError:
    def test_permuted_perfect(self):
        assert classification_error([2, 2, 0, 0, 1], [0, 0, 1, 1, 2]) == 0.0

    def test_one_cluster_against_two(self):
        assert classification_error([0] * 6, [0, 0, 0, 1, 1, 1]) == 0.5

    def test_permutation_oracle(self):
        rng = np.random.default_rng(1)
        for _ in range(100):
            pred = rng.integers(0, 3, 9)
            truth = rng.integers(0, 3, 9)
            assert classification_error(pred, truth) == pytest.approx(
                error_by_permutations(list(pred), list(truth)), abs=1e-12
            )

    def test_trivial_prediction_bound(self):
        truth = np.repeat(np.arange(4), 5)
        assert classification_error(np.zeros(20), truth) == pytest.approx(1 - 1 / 4)

    def test_too_many_groups(self):
        with pytest.raises(GroupCountMismatch):
            classification_error([0, 1, 2], [0, 1, 1], n_clusters=2)

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            classification_error([0, 1], [0])


def test_contingency():
    table = contingency([0, 0, 1, 1], ["a", "b", "b", "b"])
    assert table.tolist() == [[1, 1], [0, 2]]


def test_evaluate():
    report = evaluate([0, 0, 1], [1, 1, 0], features=[0, 1], true_features=[1, 2])
    assert report.rand_index == 1.0 and report.sym_diff == 2
