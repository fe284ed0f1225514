"""Random-search tuning and the baseline variants.

Every variant is a configuration of :class:`BOPNNClassifier`:

``bopnn``         tuned ``k, q0, q`` with discriminant projection
``bopnn-noproj``  same search without projection
``bnn``           bagged 1-NN on all covariates, bag fraction tuned by OOB
``bnn-inf``       bagged 1-NN with the asymptotic plug-in bag fraction
``knn``           one kNN model on the full training set, ``k`` by leave-one-out
"""

import math
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted, validate_data

from ._rng import DEFAULT_SEED, SplitMix64, derive_seed
from .classifier import BOPNNClassifier
from .ensemble import HyperParams
from .exceptions import BOPNNError, InsufficientPoints
from .neighbors import knn_batch

VARIANTS = ("bopnn", "bopnn-noproj", "bnn", "bnn-inf", "knn")
DEFAULT_PI_GRID = tuple(round(0.1 * i, 1) for i in range(1, 10))
DEFAULT_K_MAX = 20
FAILED = -1.0


@dataclass
class TuneResult:
    trials: list
    chosen: int
    best_estimator: BOPNNClassifier = field(default=None, repr=False)

    @property
    def best(self):
        return self.trials[self.chosen]


def sample_hyperparams(rng, d):
    """One draw of ``(k, q0, q)`` from the random-search law."""
    k = rng.integers(1, 5)
    lo = max(1, math.isqrt(d))
    hi = min(math.isqrt(100 * d), d)
    q0 = rng.integers(lo, hi)
    q = rng.integers(math.ceil(0.5 * q0), q0)
    return k, q0, q


def _estimator_for(hp, n_jobs):
    return BOPNNClassifier(
        n_neighbors=hp.k,
        subset_size=hp.q0,
        n_components=hp.q,
        n_estimators=hp.B,
        bag_fraction=hp.pi_b,
        projection=hp.projection,
        balanced=hp.balanced,
        random_state=hp.seed,
        n_jobs=n_jobs,
    )


def _run_trials(X, y, candidates, n_jobs):
    trials = []
    best, best_score, best_est = 0, -np.inf, None
    for t, hp in enumerate(candidates):
        try:
            est = _estimator_for(hp, n_jobs).fit(X, y)
            score = FAILED if est.oob_score_ is None else est.oob_score_
        except BOPNNError:
            est, score = None, FAILED
        trials.append((hp, score))
        if est is not None and score > best_score:
            best, best_score, best_est = t, score, est
    if best_est is None:
        raise BOPNNError("every tuning trial failed")
    return TuneResult(trials, best, best_est)


def tune(X, y, n_draws=30, B=100, seed=DEFAULT_SEED, projection=True, balanced=False,
         pi_b=0.63, n_jobs=1):
    """Random search over ``(k, q0, q)`` scored by out-of-bag accuracy.

    Trials that fail on degenerate samples score -1 and are never chosen; ties
    go to the earliest trial.
    """
    X = np.asarray(X, dtype=np.float64)
    d = X.shape[1]
    rng = SplitMix64(seed, 0)
    candidates = []
    for t in range(n_draws):
        k, q0, q = sample_hyperparams(rng, d)
        candidates.append(HyperParams(
            k=k, q0=q0, q=q if projection else q0, B=B, pi_b=pi_b,
            projection=projection, balanced=balanced, seed=derive_seed(seed, t + 1),
        ))
    return _run_trials(X, y, candidates, n_jobs)


def tune_bag_fraction(X, y, grid=DEFAULT_PI_GRID, B=100, seed=DEFAULT_SEED, n_jobs=1):
    """Bagged 1-NN on all covariates with the bag fraction chosen by OOB accuracy."""
    X = np.asarray(X, dtype=np.float64)
    d = X.shape[1]
    candidates = [
        HyperParams(k=1, q0=d, q=d, B=B, pi_b=float(p), projection=False,
                    seed=derive_seed(seed, t + 1))
        for t, p in enumerate(grid)
    ]
    return _run_trials(X, y, candidates, n_jobs)


def plugin_pi_b(p, k_hat):
    """Asymptotically motivated bag fraction for bagged 1-NN; 0.9 when it reaches 1."""
    if p < 1 or k_hat < 1:
        raise ValueError("p and k_hat must be >= 1")
    value = (2.0 * math.gamma(2.0 + 2.0 / p) ** 2) ** (p / (p + 4.0)) / k_hat
    return 0.9 if value >= 1.0 else value


def loocv_k(X, y, k_max=DEFAULT_K_MAX):
    """``k`` in ``1..min(k_max, n-1)`` with the best leave-one-out kNN accuracy.

    Votes break ties toward the smallest label and accuracy ties toward the
    smallest ``k``.
    """
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[0]
    if n < 2:
        raise InsufficientPoints("leave-one-out needs at least two points")
    _, codes = np.unique(y, return_inverse=True)
    n_classes = codes.max() + 1
    top = min(k_max, n - 1)
    neigh = knn_batch(X, X, top, exclude=np.arange(n))
    votes = np.zeros((n, n_classes))
    rows = np.arange(n)
    best_k, best_acc = 1, -1.0
    for k in range(1, top + 1):
        votes[rows, codes[neigh[:, k - 1]]] += 1
        acc = np.mean(np.argmax(votes, axis=1) == codes)
        if acc > best_acc:
            best_k, best_acc = k, acc
    return best_k


def fit_variant(variant, X, y, *, n_draws=30, B=100, seed=DEFAULT_SEED, n_jobs=1,
                tune_search=True, pi_grid=DEFAULT_PI_GRID, k_max=DEFAULT_K_MAX,
                balanced=False, **fixed):
    """Fit one named variant; returns ``(fitted BOPNNClassifier, TuneResult or None)``.

    ``fixed`` holds BOPNNClassifier parameters used by the untuned
    ``bopnn`` / ``bopnn-noproj`` path (``tune_search=False``).
    """
    X = np.asarray(X, dtype=np.float64)
    d = X.shape[1]
    if variant in ("bopnn", "bopnn-noproj"):
        projection = variant == "bopnn"
        if tune_search:
            result = tune(X, y, n_draws=n_draws, B=B, seed=seed, projection=projection,
                          balanced=balanced, pi_b=fixed.get("bag_fraction", 0.63), n_jobs=n_jobs)
            return result.best_estimator, result
        params = dict(n_estimators=B, random_state=seed, n_jobs=n_jobs,
                      projection=projection, balanced=balanced)
        params.update(fixed)
        return BOPNNClassifier(**params).fit(X, y), None
    if variant == "bnn":
        result = tune_bag_fraction(X, y, grid=pi_grid, B=B, seed=seed, n_jobs=n_jobs)
        return result.best_estimator, result
    if variant == "bnn-inf":
        pi_b = plugin_pi_b(d, loocv_k(X, y, k_max))
        est = BOPNNClassifier(n_neighbors=1, subset_size=d, n_estimators=B, bag_fraction=pi_b,
                              projection=False, random_state=seed, n_jobs=n_jobs)
        return est.fit(X, y), None
    if variant == "knn":
        k = loocv_k(X, y, k_max)
        est = BOPNNClassifier(n_neighbors=k, subset_size=d, n_estimators=1, bag_fraction=1.0,
                              projection=False, random_state=seed)
        return est.fit(X, y), None
    raise ValueError(f"unknown variant {variant!r}; expected one of {VARIANTS}")


class VariantClassifier(ClassifierMixin, BaseEstimator):
    """Estimator wrapper around :func:`fit_variant` for use in pipelines and benchmarks."""

    def __init__(self, variant="bopnn", n_draws=30, n_estimators=100, random_state=None,
                 balanced=False, k_max=DEFAULT_K_MAX, n_jobs=1):
        self.variant = variant
        self.n_draws = n_draws
        self.n_estimators = n_estimators
        self.random_state = random_state
        self.balanced = balanced
        self.k_max = k_max
        self.n_jobs = n_jobs

    def fit(self, X, y):
        X, y = validate_data(self, X, y, dtype=np.float64)
        seed = DEFAULT_SEED if self.random_state is None else self.random_state
        self.best_estimator_, self.tune_result_ = fit_variant(
            self.variant, X, y, n_draws=self.n_draws, B=self.n_estimators, seed=seed,
            n_jobs=self.n_jobs, balanced=self.balanced, k_max=self.k_max,
        )
        self.classes_ = self.best_estimator_.classes_
        return self

    def predict_proba(self, X):
        check_is_fitted(self, "best_estimator_")
        return self.best_estimator_.predict_proba(X)

    def predict(self, X):
        check_is_fitted(self, "best_estimator_")
        return self.best_estimator_.predict(X)
