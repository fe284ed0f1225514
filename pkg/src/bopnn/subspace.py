"""Neighbour scatter matrices and the discriminant subspaces built from them."""

from dataclasses import dataclass

import numpy as np

from .exceptions import (
    EmptyEnsemble,
    IndexOutOfRange,
    NotPositiveDefinite,
    SingleClassSample,
)
from .linalg import generalized_eigen
from .neighbors import kth_neighbours

RIDGE_SCALE = 1e-8
RIDGE_ESCALATIONS = 3


@dataclass(frozen=True)
class ScatterPair:
    sigma_in: np.ndarray
    sigma_out: np.ndarray
    n_used_in: int
    n_used_out: int


@dataclass(frozen=True)
class DiscriminantBasis:
    """Leading directions of one model, expressed in the coordinates of ``subset``.

    Attributes
    ----------
    subset : ndarray of int, shape (q0,)
        Sorted ambient column indices the model sees.
    basis : ndarray, shape (q0, q)
        Unit-norm discriminant directions, leading first.
    values : ndarray, shape (q,)
        Matching non-negative eigenvalues, non-increasing.
    """

    subset: np.ndarray
    basis: np.ndarray
    values: np.ndarray

    @property
    def q(self):
        return self.basis.shape[1]


def _weighted_outer(diffs, weights):
    return (diffs * weights[:, None]).T @ diffs


def scatter_pair(X, y, k, balanced=False):
    """Average outer products of differences to each point's k-th same-class and
    k-th other-class neighbour.

    Ranks are clamped per point to what exists: ``min(k, n_c - 1)`` inside the
    class and ``min(k, n - n_c)`` outside. Points of singleton classes contribute
    to the other-class matrix only. In balanced mode every class carries weight
    ``1/K`` shared equally by its contributing points.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    n = X.shape[0]
    classes, codes, counts = np.unique(y, return_inverse=True, return_counts=True)
    if classes.shape[0] < 2:
        raise SingleClassSample("scatter matrices need at least two classes")
    size = counts[codes]
    k_in = np.minimum(k, size - 1)
    k_out = np.minimum(k, n - size)
    idx_in, idx_out = kth_neighbours(X, codes, k_in, k_out)

    used_in = idx_in >= 0
    d_in = X[used_in] - X[idx_in[used_in]]
    d_out = X - X[idx_out]
    if balanced:
        w_in = _class_weights(codes[used_in], classes.shape[0])
        w_out = _class_weights(codes, classes.shape[0])
    else:
        w_in = np.full(d_in.shape[0], 1.0 / max(d_in.shape[0], 1))
        w_out = np.full(n, 1.0 / n)
    sigma_in = _weighted_outer(d_in, w_in)
    sigma_out = _weighted_outer(d_out, w_out)
    return ScatterPair(
        0.5 * (sigma_in + sigma_in.T),
        0.5 * (sigma_out + sigma_out.T),
        int(used_in.sum()),
        n,
    )


def _class_weights(codes, n_classes):
    counts = np.bincount(codes, minlength=n_classes)
    present = np.count_nonzero(counts)
    return 1.0 / (present * counts[codes])


def ridge_schedule(Bmat, A):
    """Ridge values tried in turn when ``Bmat`` is not numerically positive definite."""
    dim = Bmat.shape[0]
    scale = np.trace(Bmat) / dim
    if not scale > 0:
        scale = np.trace(A) / dim
    if not scale > 0:
        scale = 1.0
    return [RIDGE_SCALE * scale * 10.0**i for i in range(RIDGE_ESCALATIONS + 1)]


def solve_discriminant(sigma_out, sigma_in):
    """Generalized eigenpairs of (sigma_out, sigma_in) with ridge escalation.

    Returns the eigen-basis and the ridge that succeeded.
    """
    for ridge in ridge_schedule(sigma_in, sigma_out):
        try:
            return generalized_eigen(sigma_out, sigma_in, ridge), ridge
        except NotPositiveDefinite:
            continue
    raise NotPositiveDefinite("in-class scatter stayed singular after ridge escalation")


def discriminant_basis(sc, subset, q):
    """Top ``q`` directions maximising out-class over in-class neighbour scatter."""
    subset = np.asarray(subset, dtype=np.int64)
    dim = sc.sigma_in.shape[0]
    if not 1 <= q <= dim:
        raise ValueError(f"q must lie in [1, {dim}], got {q}")
    eig, _ = solve_discriminant(sc.sigma_out, sc.sigma_in)
    return DiscriminantBasis(subset, eig.vectors[:, :q].copy(), eig.values[:q].copy())


def importance_contribution(db, d):
    """Diagonal of ``V V^T`` with ``V = basis * sqrt(values)``, scattered to ``d`` ambient slots."""
    subset = np.asarray(db.subset)
    if subset.size and (subset.max() >= d or subset.min() < 0):
        raise IndexOutOfRange(f"subset index out of range for d={d}")
    out = np.zeros(d)
    out[subset] = (db.basis**2) @ db.values
    return out


def ensemble_projection(bases, d):
    """Average of the ambient-embedded ``U U^T`` over all models."""
    if len(bases) == 0:
        raise EmptyEnsemble("no bases to average")
    P = np.zeros((d, d))
    for db in bases:
        U = np.zeros((d, db.q))
        U[db.subset] = db.basis
        P += U @ U.T
    P /= len(bases)
    return 0.5 * (P + P.T)
