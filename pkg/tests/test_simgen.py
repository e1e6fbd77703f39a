import numpy as np
import pytest

from sasclust.exceptions import ConstantColumn
from sasclust.simgen import FAMILIES, SimulationSpec, generate, standardize


def draw(family, **kw):
    return generate(SimulationSpec(family, **kw))


class TestShapes:
    @pytest.mark.parametrize("family", FAMILIES)
    def test_balanced_truth(self, family):
        data = draw(family, p=60, m=7, seed=1)
        assert data.X.shape == (21, 60)
        assert np.bincount(data.truth).tolist() == [7, 7, 7]

    @pytest.mark.parametrize("family", FAMILIES)
    def test_seed_determinism(self, family):
        a = draw(family, p=60, seed=2)
        b = draw(family, p=60, seed=2)
        assert np.array_equal(a.X, b.X)

    def test_identity_true_features(self):
        data = draw("identity", p=500)
        assert data.X.shape == (90, 500)
        assert data.true_features.tolist() == list(range(50))

    def test_identity_small_p(self):
        assert draw("identity", p=20).true_features.size == 20

    def test_categorical_true_features(self):
        data = draw("categorical", p=30, signal=0.8)
        assert data.true_features.tolist() == list(range(15))
        assert set(np.unique(data.X)) <= {0, 1}

    def test_varying_kappa(self):
        data = draw("varying_kappa", p=500, n_clusters=2)
        assert data.X.shape == (60, 500)
        assert data.true_features.tolist() == list(range(50))

    def test_invalid_specs(self):
        with pytest.raises(ValueError):
            SimulationSpec("spiral")
        with pytest.raises(ValueError):
            SimulationSpec("categorical", signal=1.5)
        with pytest.raises(ValueError):
            draw("identity", n_clusters=4)
        with pytest.raises(ValueError):
            draw("same_cov", p=40)
        with pytest.raises(ValueError):
            draw("categorical", p=10)
        with pytest.raises(ValueError):
            draw("varying_kappa", n_clusters=11)


class TestMoments:
    def test_identity_cluster_mean(self):
        for seed in range(10):
            data = draw("identity", p=60, signal=1.0, seed=seed)
            mean = data.X[data.truth == 0, 0].mean()
            assert abs(mean - 1.0) < 4 / np.sqrt(30)

    def test_identity_zero_signal(self):
        data = draw("identity", p=60, signal=0.0, m=2000, seed=3)
        means = [data.X[data.truth == g, :50].mean() for g in range(3)]
        assert np.ptp(means) < 0.02

    def test_same_cov_means(self):
        data = draw("same_cov", p=60, signal=0.5, m=4000, seed=4)
        g0 = data.X[data.truth == 0].mean(axis=0)
        g2 = data.X[data.truth == 2].mean(axis=0)
        expected = 1.0 + 0.02 * np.arange(1, 51)
        assert np.allclose(g0[:50], expected, atol=0.15)
        assert np.allclose(g2[:50] - g0[:50], 1.0, atol=0.2)
        assert np.allclose(g0[50:], 0.0, atol=0.15)

    def test_same_cov_variance_band(self):
        data = draw("same_cov", p=60, signal=0.0, m=2000, seed=5)
        var = data.X.var(axis=0, ddof=1)
        assert var.min() > 0.9 and var.max() < 5.3

    def test_diff_cov_variance_order(self):
        data = draw("diff_cov", p=60, signal=1.0, m=500, seed=6)
        v1 = data.X[data.truth == 0].var(axis=0, ddof=1).mean()
        v3 = data.X[data.truth == 2].var(axis=0, ddof=1).mean()
        assert 1.3 < v1 < 1.7 and 3.3 < v3 < 3.7

    def test_categorical_noise_rate(self):
        data = draw("categorical", p=40, signal=0.8, m=2000, seed=7)
        assert abs(data.X[:, 15:].mean() - 0.1) < 0.01
        block = data.X[data.truth == 1][:, 5:10].mean()
        assert abs(block - 0.8) < 0.02

    def test_varying_kappa_center_variance(self):
        centers = []
        for seed in range(40):
            data = draw("varying_kappa", p=60, n_clusters=5, m=400, seed=seed)
            for g in range(5):
                centers.append(data.X[data.truth == g, :50].mean(axis=0))
        assert abs(np.var(centers) - 0.4) < 0.05


class TestStandardize:
    def test_simple_column(self):
        assert np.allclose(standardize([[1.0], [2.0], [3.0]])[:, 0], [-1, 0, 1])

    def test_idempotent(self):
        X = np.random.default_rng(8).normal(size=(20, 5)) * 3 + 2
        once = standardize(X)
        assert np.allclose(standardize(once), once, atol=1e-12)
        assert np.allclose(once.var(axis=0, ddof=1), 1.0)

    def test_constant_column(self):
        with pytest.raises(ConstantColumn) as info:
            standardize([[1.0, 2.0], [3.0, 2.0]])
        assert info.value.column == 1
