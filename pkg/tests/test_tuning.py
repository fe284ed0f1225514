import math

import mpmath
import numpy as np
import pytest

from bopnn._rng import SplitMix64
from bopnn.datasets import make_blobs
from bopnn.tuning import (
    FAILED,
    VariantClassifier,
    fit_variant,
    loocv_k,
    plugin_pi_b,
    sample_hyperparams,
    tune,
    tune_bag_fraction,
)
from oracles import knn_classify


def _plugin_oracle(p, k_hat):
    g = mpmath.gamma(mpmath.mpf(2) + mpmath.mpf(2) / p)
    return float((2 * g**2) ** (mpmath.mpf(p) / (p + 4)) / k_hat)


class TestPlugin:
    def test_two_dims(self):
        assert plugin_pi_b(2, 4) == pytest.approx(0.5, abs=1e-15)

    def test_four_dims(self):
        assert _plugin_oracle(4, 2) == pytest.approx(0.93999, abs=1e-5)
        assert plugin_pi_b(4, 2) == pytest.approx(_plugin_oracle(4, 2), rel=1e-14)

    @pytest.mark.parametrize("p", range(1, 11))
    def test_clamp_for_one_neighbour(self, p):
        assert plugin_pi_b(p, 1) == 0.9


class TestSampling:
    def test_ranges_d100(self):
        rng = SplitMix64(1)
        draws = [sample_hyperparams(rng, 100) for _ in range(3000)]
        assert {k for k, _, _ in draws} == set(range(1, 6))
        assert {q0 for _, q0, _ in draws} == set(range(10, 101))
        assert all(math.ceil(q0 / 2) <= q <= q0 for _, q0, q in draws)

    def test_q_range_for_q0_7(self):
        rng = SplitMix64(3)
        draws = [sample_hyperparams(rng, 7) for _ in range(2000)]
        assert {q0 for _, q0, _ in draws} == set(range(2, 8))
        assert {q for _, q0, q in draws if q0 == 7} == {4, 5, 6, 7}

    def test_single_dimension(self):
        rng = SplitMix64(5)
        assert all(sample_hyperparams(rng, 1)[1:] == (1, 1) for _ in range(50))


class TestTune:
    def test_selects_best_and_is_reproducible(self):
        X, y = make_blobs(80, d=4, n_classes=2, spread=2.0, seed=2)
        a = tune(X, y, n_draws=4, B=10, seed=11)
        b = tune(X, y, n_draws=4, B=10, seed=11)
        assert [(hp, s) for hp, s in a.trials] == [(hp, s) for hp, s in b.trials]
        scores = [s for _, s in a.trials]
        assert a.chosen == scores.index(max(scores))
        assert a.best_estimator.oob_score_ == max(scores)

    def test_one_dimensional_data(self):
        X, y = make_blobs(40, d=1, seed=0)
        res = tune(X, y, n_draws=5, B=5)
        assert all(hp.q0 == hp.q == 1 for hp, _ in res.trials)

    def test_failed_trials_recorded(self):
        # 5 points: bags of floor(0.3 * 5) = 1 point always fail.
        X, y = np.arange(5.0)[:, None], np.array([1, 2, 1, 2, 1])
        res = tune_bag_fraction(X, y, grid=(0.3, 0.9), B=3)
        assert res.trials[0][1] == FAILED
        assert res.chosen == 1

    def test_no_projection_keeps_full_subset(self):
        X, y = make_blobs(60, d=6, seed=1)
        res = tune(X, y, n_draws=3, B=5, projection=False)
        assert all(hp.q == hp.q0 and not hp.projection for hp, _ in res.trials)


class TestLoocv:
    def test_separable(self):
        X, y = make_blobs(40, seed=1)
        assert loocv_k(X, y, 10) == 1

    def test_two_points(self):
        assert loocv_k(np.array([[0.0], [1.0]]), np.array([1, 2]), 5) == 1

    def test_double_loop_oracle(self, rng):
        for _ in range(5):
            X = rng.standard_normal((35, 2))
            y = rng.integers(1, 4, 35)
            accs = []
            for k in range(1, 9):
                hits = [knn_classify(np.delete(X, i, 0), np.delete(y, i), X[i], k) == y[i] for i in range(35)]
                accs.append(np.mean(hits))
            assert loocv_k(X, y, 8) == 1 + int(np.argmax(accs))


class TestVariants:
    X, y = make_blobs(80, d=3, n_classes=2, spread=1.5, seed=8)

    def test_knn_variant(self):
        est, res = fit_variant("knn", self.X, self.y)
        hp = est.hyperparams_
        assert res is None and (hp.B, hp.pi_b, hp.projection, hp.q0) == (1, 1.0, False, 3)
        assert est.oob_score_ is None

    def test_bnn_inf(self):
        est, _ = fit_variant("bnn-inf", self.X, self.y, B=10)
        hp = est.hyperparams_
        assert hp.k == 1 and not hp.projection
        assert hp.pi_b == pytest.approx(plugin_pi_b(3, loocv_k(self.X, self.y)))

    def test_bnn(self):
        est, res = fit_variant("bnn", self.X, self.y, B=10)
        assert len(res.trials) == 9 and est.hyperparams_.k == 1

    def test_untuned_bopnn(self):
        est, res = fit_variant("bopnn", self.X, self.y, tune_search=False, B=7, n_neighbors=2)
        assert res is None and est.hyperparams_.k == 2 and est.hyperparams_.B == 7

    def test_unknown(self):
        with pytest.raises(ValueError):
            fit_variant("rf", self.X, self.y)

    def test_wrapper(self):
        clf = VariantClassifier("bopnn-noproj", n_draws=2, n_estimators=5).fit(self.X, self.y)
        assert clf.score(self.X, self.y) > 0.9
