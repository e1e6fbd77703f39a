import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import wcd_loops, wcss_direct
from sasclust.dissim import (
    DissimilarityStack,
    check_features,
    check_labels,
    coordinate_wcd_per_feature,
    euclidean_stack,
    feature_scale,
    hamming_stack,
    normalize,
    normalized_coordinates,
    subset_sum,
    wcd,
    wcd_per_feature,
)
from sasclust.exceptions import (
    DimensionMismatch,
    EmptyCluster,
    IndexOutOfRange,
    ZeroFeature,
)


def random_stack(rng, p, n):
    a = rng.random((p, n, n))
    entries = a + a.transpose(0, 2, 1)
    entries[:, np.arange(n), np.arange(n)] = 0.0
    return DissimilarityStack(entries)


def random_labels(rng, n, k):
    labels = np.concatenate([np.arange(k), rng.integers(0, k, n - k)])
    return rng.permutation(labels)


class TestNormalize:
    def test_equal_off_diagonal(self):
        D = np.full((3, 3), 2.5)
        np.fill_diagonal(D, 0)
        out = normalize(DissimilarityStack(D[None]))
        off = out.entries[0][~np.eye(3, dtype=bool)]
        assert np.allclose(off, 1 / 6)

    def test_idempotent(self):
        stack = normalize(random_stack(np.random.default_rng(0), 4, 5))
        again = normalize(DissimilarityStack(stack.entries))
        assert np.allclose(again.entries, stack.entries, atol=1e-15)
        assert normalize(stack) is stack

    def test_zero_slice(self):
        entries = np.zeros((2, 3, 3))
        entries[0, 0, 1] = entries[0, 1, 0] = 1.0
        with pytest.raises(ZeroFeature) as info:
            normalize(DissimilarityStack(entries))
        assert info.value.feature == 1

    @given(st.integers(1, 5), st.integers(2, 7), st.integers(0, 10_000))
    def test_slices_sum_to_one(self, p, n, seed):
        stack = normalize(random_stack(np.random.default_rng(seed), p, n))
        assert np.allclose(stack.entries.sum(axis=(1, 2)), 1.0, atol=1e-9)


class TestStacks:
    def test_euclidean_slice(self):
        X = np.array([[0.0], [1.0], [3.0]])
        expected = [[0, 1, 9], [1, 0, 4], [9, 4, 0]]
        assert np.array_equal(euclidean_stack(X).entries[0], expected)

    def test_euclidean_two_items(self):
        assert np.array_equal(euclidean_stack([[0.0], [2.0]]).entries[0], [[0, 4], [4, 0]])

    def test_constant_column_gives_zero_slice(self):
        X = np.array([[1.0, 0.0], [1.0, 2.0], [1.0, 5.0]])
        assert not euclidean_stack(X).entries[0].any()

    def test_hamming_slice(self):
        out = hamming_stack(np.array([[0], [0], [1]])).entries[0]
        assert np.array_equal(out, [[0, 0, 1], [0, 0, 1], [1, 1, 0]])

    def test_hamming_identical_rows(self):
        assert not hamming_stack(np.ones((4, 3), dtype=int)).entries.any()

    def test_hamming_discordant_pairs(self):
        out = hamming_stack(np.array([[0], [1], [0], [1]])).entries[0]
        assert out.sum() == 8

    def test_hamming_on_strings(self):
        out = hamming_stack(np.array([["a"], ["b"], ["a"]])).entries[0]
        assert out[0, 2] == 0 and out[0, 1] == 1

    def test_too_few_items(self):
        with pytest.raises(DimensionMismatch):
            euclidean_stack(np.zeros((1, 3)))

    def test_bad_shape(self):
        with pytest.raises(DimensionMismatch):
            DissimilarityStack(np.zeros((3, 2, 4)))


class TestWcd:
    def test_hand_example(self):
        D = np.array([[0, 0.2, 0.3], [0.2, 0, 0.5], [0.3, 0.5, 0]])
        assert wcd(D, [0, 0, 1]) == pytest.approx(0.2, abs=1e-12)

    def test_singletons(self):
        D = random_stack(np.random.default_rng(1), 1, 5).entries[0]
        assert wcd(D, np.arange(5)) == 0.0

    def test_one_cluster_on_normalized_slice(self):
        stack = normalize(random_stack(np.random.default_rng(2), 1, 6))
        assert wcd(stack.entries[0], np.zeros(6, dtype=int)) == pytest.approx(1 / 6)

    def test_per_feature_single_slice(self):
        stack = random_stack(np.random.default_rng(3), 1, 5)
        labels = [0, 1, 0, 1, 1]
        assert wcd_per_feature(stack, labels)[0] == pytest.approx(wcd(stack.entries[0], labels))

    def test_per_feature_singletons(self):
        stack = random_stack(np.random.default_rng(4), 3, 4)
        assert not wcd_per_feature(stack, np.arange(4)).any()

    def test_empty_cluster_rejected(self):
        with pytest.raises(EmptyCluster):
            wcd(np.zeros((3, 3)), [0, 0, 2], n_clusters=3)

    def test_label_out_of_range(self):
        with pytest.raises(IndexOutOfRange):
            wcd(np.zeros((3, 3)), [0, 1, 3], n_clusters=3)

    @given(st.integers(2, 8), st.integers(1, 4), st.integers(0, 10_000))
    def test_matches_loops(self, n, k, seed):
        rng = np.random.default_rng(seed)
        k = min(k, n)
        D = random_stack(rng, 1, n).entries[0]
        labels = random_labels(rng, n, k)
        assert wcd(D, labels) == pytest.approx(wcd_loops(D, list(labels)), abs=1e-9)

    @given(st.integers(2, 8), st.integers(1, 6), st.integers(0, 10_000))
    def test_linear_over_subsets(self, n, p, seed):
        rng = np.random.default_rng(seed)
        stack = random_stack(rng, p, n)
        labels = random_labels(rng, n, min(3, n))
        S = np.flatnonzero(rng.random(p) < 0.5)
        if S.size == 0:
            S = np.array([0])
        per = wcd_per_feature(stack, labels)
        assert per[S].sum() == pytest.approx(wcd(subset_sum(stack, S), labels), abs=1e-9)

    @given(st.integers(2, 8), st.integers(1, 4), st.integers(0, 10_000))
    def test_euclidean_factor_two(self, n, p, seed):
        rng = np.random.default_rng(seed)
        X = rng.normal(size=(n, p))
        labels = random_labels(rng, n, min(3, n))
        summed = euclidean_stack(X).entries.sum(axis=0)
        assert wcd(summed, labels) == pytest.approx(
            2.0 * wcss_direct(X, list(labels)), abs=1e-9
        )


class TestSubsetSum:
    def test_all_features(self):
        stack = random_stack(np.random.default_rng(5), 3, 4)
        assert np.allclose(subset_sum(stack, [0, 1, 2]), stack.entries.sum(axis=0))

    def test_single_feature(self):
        stack = random_stack(np.random.default_rng(6), 3, 4)
        assert np.array_equal(subset_sum(stack, [1]), stack.entries[1])

    def test_two_by_two(self):
        x, y = 0.3, 1.1
        entries = np.array([[[0, x], [x, 0]], [[0, y], [y, 0]]])
        out = subset_sum(DissimilarityStack(entries), [0, 1])
        assert np.allclose(out, [[0, x + y], [x + y, 0]])

    def test_bad_indices(self):
        stack = random_stack(np.random.default_rng(7), 2, 3)
        with pytest.raises(IndexOutOfRange):
            subset_sum(stack, [2])
        with pytest.raises(IndexOutOfRange):
            check_features([0, 0], 2)


class TestCoordinateRoute:
    def test_feature_scale_matches_stack(self):
        X = np.random.default_rng(8).normal(size=(7, 3))
        assert np.allclose(feature_scale(X), euclidean_stack(X).entries.sum(axis=(1, 2)))

    @given(st.integers(2, 8), st.integers(1, 4), st.integers(0, 10_000))
    def test_per_feature_matches_dense(self, n, p, seed):
        rng = np.random.default_rng(seed)
        X = rng.normal(size=(n, p))
        labels = random_labels(rng, n, min(2, n))
        dense = wcd_per_feature(euclidean_stack(X), labels)
        assert np.allclose(coordinate_wcd_per_feature(X, labels), dense, atol=1e-9)

    def test_normalized_coordinates_match_normalized_stack(self):
        rng = np.random.default_rng(9)
        X = rng.normal(size=(6, 3)) * [1, 10, 0.1]
        Z = normalized_coordinates(X)
        dense = normalize(euclidean_stack(X))
        assert np.allclose(euclidean_stack(Z).entries, dense.entries, atol=1e-12)

    def test_constant_column(self):
        X = np.array([[1.0, 2.0], [1.0, 3.0]])
        with pytest.raises(ZeroFeature):
            normalized_coordinates(X)


def test_check_labels_reencodes():
    codes, k = check_labels(np.array(["b", "a", "b"]))
    assert k == 2 and codes.tolist() == [1, 0, 1]
