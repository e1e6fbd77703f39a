import numpy as np
import pytest
from sklearn.base import clone

from sasclust import SASClustering
from sasclust.dissim import euclidean_stack
from sasclust.exceptions import ConstantColumn, TooFewItems, ZeroFeature
from sasclust.metrics import rand_index
from sasclust.simgen import SimulationSpec, generate


@pytest.fixture(scope="module")
def identity_data():
    return generate(SimulationSpec("identity", p=80, m=20, signal=1.2, seed=0))


def test_params_round_trip():
    est = SASClustering(n_clusters=4, n_features=7, random_state=3)
    params = est.get_params()
    assert params["n_clusters"] == 4 and params["n_features"] == 7
    copy = clone(est)
    assert copy.get_params() == params


def test_fixed_sparsity(identity_data):
    est = SASClustering(n_clusters=3, n_features=50).fit(identity_data.X)
    assert est.n_selected_ == 50
    assert est.get_support().sum() == 50
    assert np.array_equal(est.get_support(indices=True), est.features_)
    assert rand_index(est.labels_, identity_data.truth) > 0.95
    assert est.transform(identity_data.X).shape == (60, 50)
    assert est.gap_profile_ is None


def test_fit_predict_matches_labels(identity_data):
    est = SASClustering(n_clusters=3, n_features=20)
    labels = est.fit_predict(identity_data.X)
    assert np.array_equal(labels, est.labels_)


def test_golden_tuning(identity_data):
    est = SASClustering(n_clusters=3, tuning="golden", n_perms=5).fit(identity_data.X)
    assert 1 <= est.n_selected_ <= 80
    assert est.gap_profile_.argmax() == est.n_selected_


def test_grid_tuning(identity_data):
    est = SASClustering(n_clusters=3, grid_step=20, n_perms=3).fit(identity_data.X)
    assert est.gap_profile_.grid.tolist() == [1, 21, 41, 61]


def test_constant_column():
    X = np.random.default_rng(1).normal(size=(20, 5))
    X[:, 2] = 4.0
    with pytest.raises(ConstantColumn):
        SASClustering(n_clusters=2, n_features=2).fit(X)
    est = SASClustering(n_clusters=2, n_features=2, drop_constant=True).fit(X)
    assert 2 not in est.features_
    assert est.kept_features_.tolist() == [0, 1, 3, 4]


def test_hamming_metric():
    data = generate(SimulationSpec("categorical", p=30, signal=0.9, seed=2))
    letters = np.where(data.X == 1, "yes", "no")
    est = SASClustering(n_clusters=3, n_features=15, metric="hamming").fit(letters)
    assert rand_index(est.labels_, data.truth) > 0.9


def test_hamming_constant_feature():
    X = np.array([[0, 1], [0, 0], [0, 1], [0, 0]])
    with pytest.raises(ZeroFeature):
        SASClustering(n_clusters=2, n_features=1, metric="hamming").fit(X)


def test_precomputed_stack():
    rng = np.random.default_rng(3)
    X = rng.normal(size=(30, 6))
    X[:15, :2] += 5
    stack = euclidean_stack(X).entries
    est = SASClustering(n_clusters=2, n_features=2, metric="precomputed").fit(stack)
    assert est.features_.tolist() == [0, 1]
    assert rand_index(est.labels_, np.repeat([0, 1], 15)) == 1.0


def test_too_many_clusters():
    with pytest.raises(TooFewItems):
        SASClustering(n_clusters=5, n_features=1).fit(np.random.default_rng(4).normal(size=(4, 2)))


def test_unknown_options():
    X = np.random.default_rng(5).normal(size=(10, 3))
    with pytest.raises(ValueError):
        SASClustering(metric="cosine").fit(X)
    with pytest.raises(ValueError):
        SASClustering(tuning="random", n_perms=2).fit(X)


def test_reproducible(identity_data):
    a = SASClustering(n_clusters=3, n_features=30, random_state=7).fit(identity_data.X)
    b = SASClustering(n_clusters=3, n_features=30, random_state=7).fit(identity_data.X)
    assert np.array_equal(a.labels_, b.labels_)
    assert np.array_equal(a.features_, b.features_)
