"""Projected kNN base learners and their bagged aggregation.

This is the functional core behind :class:`bopnn.BOPNNClassifier`. Class labels
are integer codes ``0..K-1`` and ``X`` is a float array of shape (n, d).
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, replace

import numba
import numpy as np

from ._rng import DEFAULT_SEED, SplitMix64
from .exceptions import InsufficientPoints, NoOOBPoints, SingleClassSample
from .neighbors import vote_distribution
from .subspace import DiscriminantBasis, discriminant_basis, scatter_pair

MAX_RESAMPLES = 100


@dataclass(frozen=True)
class HyperParams:
    k: int = 3
    q0: int = 1
    q: int = 1
    B: int = 100
    pi_b: float = 0.63
    projection: bool = True
    balanced: bool = False
    seed: int = DEFAULT_SEED

    def validate(self, d):
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if not 1 <= self.q0 <= d:
            raise ValueError(f"q0 must lie in [1, {d}], got {self.q0}")
        if not 1 <= self.q <= self.q0:
            raise ValueError(f"q must lie in [1, q0={self.q0}], got {self.q}")
        if self.B < 1:
            raise ValueError(f"B must be >= 1, got {self.B}")
        if not 0.0 < self.pi_b <= 1.0:
            raise ValueError(f"pi_b must lie in (0, 1], got {self.pi_b}")
        return self

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        return cls(**data)

    def with_(self, **changes):
        return replace(self, **changes)


@dataclass(frozen=True)
class BaseModel:
    """One bagged learner.

    ``projected`` holds the in-bag points in the model's own coordinates: the
    discriminant coordinates when ``discriminant`` is set, otherwise the raw
    restricted covariates.
    """

    subset: np.ndarray
    inbag: np.ndarray
    inbag_labels: np.ndarray
    projected: np.ndarray
    discriminant: DiscriminantBasis = None

    @property
    def n_bag(self):
        return self.inbag.shape[0]

    def transform(self, X):
        return project_rows(X, self.subset, None if self.discriminant is None else self.discriminant.basis)


@numba.njit(cache=True, nogil=True)
def _project_kernel(X, subset, basis):
    # Row-by-row so a point projects to the same bits alone or inside a batch.
    out = np.zeros((X.shape[0], basis.shape[1]))
    for r in range(X.shape[0]):
        for c in range(basis.shape[1]):
            acc = 0.0
            for j in range(subset.shape[0]):
                acc += X[r, subset[j]] * basis[j, c]
            out[r, c] = acc
    return out


def project_rows(X, subset, basis=None):
    X = np.ascontiguousarray(X, dtype=np.float64)
    if basis is None:
        return np.ascontiguousarray(X[:, subset])
    return _project_kernel(X, np.asarray(subset, dtype=np.int64), np.ascontiguousarray(basis))


def bag_size(pi_b, n):
    # Rounding guards products like 0.29 * 100 = 28.999999999999996.
    return int(math.floor(round(pi_b * n, 9)))


def fit_base(X, y, hp, b):
    """Fit the ``b``-th base model; its randomness depends only on ``(hp.seed, b)``."""
    n, d = X.shape
    n_bag = bag_size(hp.pi_b, n)
    if n_bag < 2:
        raise InsufficientPoints(f"bag of {n_bag} points from n={n}, pi_b={hp.pi_b}")
    rng = SplitMix64(hp.seed, b)
    for _ in range(MAX_RESAMPLES):
        inbag = rng.sample_indices(n, n_bag)
        if np.unique(y[inbag]).shape[0] >= 2:
            break
    else:
        raise SingleClassSample(f"model {b}: every resampled bag held a single class")
    subset = rng.sample_indices(d, hp.q0)
    labels = np.ascontiguousarray(y[inbag], dtype=np.int64)
    Xb = X[inbag]
    if hp.projection:
        k_scatter = min(hp.k, n_bag - 1)
        sc = scatter_pair(Xb[:, subset], labels, k_scatter, hp.balanced)
        disc = discriminant_basis(sc, subset, hp.q)
        projected = project_rows(Xb, subset, disc.basis)
    else:
        disc = None
        projected = project_rows(Xb, subset)
    return BaseModel(subset, inbag, labels, projected, disc)


def predict_base(model, X, k, n_classes):
    """Neighbour vote distribution of one model, shape (n_queries, K)."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    k_eff = min(k, model.n_bag)
    return vote_distribution(model.projected, model.inbag_labels, model.transform(X), k_eff, n_classes)


def fit_models(X, y, hp, n_jobs=1):
    """Fit all ``hp.B`` base models; output order and content ignore ``n_jobs``."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.int64)
    if np.unique(y).shape[0] < 2:
        raise SingleClassSample("training data holds a single class")
    indices = range(1, hp.B + 1)
    if n_jobs is None or n_jobs == 1 or hp.B == 1:
        return [fit_base(X, y, hp, b) for b in indices]
    workers = None if n_jobs < 0 else n_jobs
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda b: fit_base(X, y, hp, b), indices))


def aggregate(models, X, k, n_classes):
    """Arithmetic mean of the base distributions."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    total = np.zeros((X.shape[0], n_classes))
    for m in models:
        total += predict_base(m, X, k, n_classes)
    return total / len(models)


def oob_accuracy(models, X, y, k, n_classes):
    """Accuracy of out-of-bag aggregated votes over training points scored at least once."""
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[0]
    total = np.zeros((n, n_classes))
    count = np.zeros(n, dtype=np.int64)
    for m in models:
        oob = np.ones(n, dtype=bool)
        oob[m.inbag] = False
        if not oob.any():
            continue
        total[oob] += predict_base(m, X[oob], k, n_classes)
        count[oob] += 1
    scored = count > 0
    if not scored.any():
        raise NoOOBPoints("every training point is in every bag")
    means = total[scored] / count[scored, None]
    return float(np.mean(np.argmax(means, axis=1) == np.asarray(y)[scored]))
