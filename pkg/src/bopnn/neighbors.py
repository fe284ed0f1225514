"""Exact brute-force Euclidean neighbour search.

All routines compare squared distances and break distance ties by the lower
point index, so results are fully deterministic. Class labels here are integer
codes ``0..K-1``.
"""

import numba
import numpy as np

from .exceptions import InsufficientPoints


@numba.njit(cache=True, nogil=True, inline="always")
def _sqdist(P, i, x):
    acc = 0.0
    for j in range(P.shape[1]):
        diff = P[i, j] - x[j]
        acc += diff * diff
    return acc


@numba.njit(cache=True, nogil=True, inline="always")
def _insert(best_d, best_i, filled, k, dist, idx):
    # Keeps best_* sorted by (distance, index); points arrive in index order,
    # so an equal distance never displaces an earlier entry.
    if filled == k and not dist < best_d[k - 1]:
        return filled
    pos = filled if filled < k else k - 1
    while pos > 0 and best_d[pos - 1] > dist:
        if pos < k:
            best_d[pos] = best_d[pos - 1]
            best_i[pos] = best_i[pos - 1]
        pos -= 1
    best_d[pos] = dist
    best_i[pos] = idx
    return filled + 1 if filled < k else filled


@numba.njit(cache=True, nogil=True)
def _knn_batch(P, Q, k, exclude):
    out = np.empty((Q.shape[0], k), dtype=np.int64)
    best_d = np.empty(k)
    best_i = np.empty(k, dtype=np.int64)
    for r in range(Q.shape[0]):
        filled = 0
        x = Q[r]
        for i in range(P.shape[0]):
            if i == exclude[r]:
                continue
            filled = _insert(best_d, best_i, filled, k, _sqdist(P, i, x), i)
        out[r, :] = best_i
    return out


@numba.njit(cache=True, nogil=True)
def _vote_batch(P, labels, Q, k, n_classes):
    out = np.zeros((Q.shape[0], n_classes))
    best_d = np.empty(k)
    best_i = np.empty(k, dtype=np.int64)
    for r in range(Q.shape[0]):
        filled = 0
        x = Q[r]
        for i in range(P.shape[0]):
            filled = _insert(best_d, best_i, filled, k, _sqdist(P, i, x), i)
        for j in range(k):
            out[r, labels[best_i[j]]] += 1.0
        for c in range(n_classes):
            out[r, c] /= k
    return out


@numba.njit(cache=True, nogil=True)
def _kth_by_class(P, labels, k_in, k_out):
    """For each point, index of its k_in[i]-th same-class and k_out[i]-th other-class
    neighbour (self excluded). A zero request yields -1."""
    n = P.shape[0]
    kmax = 1
    for i in range(n):
        kmax = max(kmax, k_in[i], k_out[i])
    in_d = np.empty(kmax)
    in_i = np.empty(kmax, dtype=np.int64)
    out_d = np.empty(kmax)
    out_i = np.empty(kmax, dtype=np.int64)
    idx_in = np.full(n, -1, dtype=np.int64)
    idx_out = np.full(n, -1, dtype=np.int64)
    for r in range(n):
        x = P[r]
        f_in = 0
        f_out = 0
        for i in range(n):
            if i == r:
                continue
            if labels[i] == labels[r]:
                if k_in[r] > 0:
                    f_in = _insert(in_d, in_i, f_in, k_in[r], _sqdist(P, i, x), i)
            elif k_out[r] > 0:
                f_out = _insert(out_d, out_i, f_out, k_out[r], _sqdist(P, i, x), i)
        if k_in[r] > 0 and f_in == k_in[r]:
            idx_in[r] = in_i[k_in[r] - 1]
        if k_out[r] > 0 and f_out == k_out[r]:
            idx_out[r] = out_i[k_out[r] - 1]
    return idx_in, idx_out


def _as_points(points):
    P = np.ascontiguousarray(points, dtype=np.float64)
    if P.ndim == 1:
        P = P[:, None]
    if P.ndim != 2 or P.shape[0] < 1:
        raise ValueError("points must be a non-empty (n, m) array")
    return P


def _as_queries(queries, m):
    Q = np.ascontiguousarray(queries, dtype=np.float64)
    if Q.ndim == 0 or (Q.ndim == 1 and m != 1 and Q.shape[0] == m):
        Q = Q.reshape(1, -1)
    elif Q.ndim == 1:
        Q = Q.reshape(-1, m)
    if Q.shape[1] != m:
        raise ValueError(f"queries have {Q.shape[1]} columns, points have {m}")
    return Q


def knn_indices(points, query, k, exclude=None):
    """Indices of the ``k`` nearest points to ``query``, ordered by (distance, index)."""
    P = _as_points(points)
    q = _as_queries(query, P.shape[1])
    if q.shape[0] != 1:
        raise ValueError("knn_indices takes a single query; use knn_batch")
    return knn_batch(P, q, k, None if exclude is None else [exclude])[0]


def knn_batch(points, queries, k, exclude=None):
    """Row-wise :func:`knn_indices` for several queries at once.

    ``exclude`` optionally gives, per query, one point index to skip (leave-one-out).
    """
    P = _as_points(points)
    Q = _as_queries(queries, P.shape[1])
    if exclude is None:
        excl = np.full(Q.shape[0], -1, dtype=np.int64)
    else:
        excl = np.asarray(exclude, dtype=np.int64).reshape(Q.shape[0])
    usable = P.shape[0] - (1 if np.any(excl >= 0) else 0)
    if k < 1 or k > usable:
        raise InsufficientPoints(f"k={k} but only {usable} usable points")
    return _knn_batch(P, Q, int(k), excl)


def _class_counts(labels, i, k):
    labels = np.asarray(labels)
    same = int(np.sum(labels == labels[i])) - 1
    return same, labels.shape[0] - 1 - same


def kth_same_class(points, labels, i, k):
    """Index of the k-th nearest point sharing the label of point ``i`` (``i`` excluded)."""
    same, _ = _class_counts(labels, i, k)
    if k < 1 or k > same:
        raise InsufficientPoints(f"point {i} has only {same} same-class neighbours")
    k_in, k_out = _request(len(labels), i, k, 0)
    return int(_kth_by_class(_as_points(points), _codes(labels), k_in, k_out)[0][i])


def kth_other_class(points, labels, i, k):
    """Index of the k-th nearest point whose label differs from that of point ``i``."""
    _, other = _class_counts(labels, i, k)
    if k < 1 or k > other:
        raise InsufficientPoints(f"point {i} has only {other} other-class neighbours")
    k_in, k_out = _request(len(labels), i, 0, k)
    return int(_kth_by_class(_as_points(points), _codes(labels), k_in, k_out)[1][i])


def _request(n, i, k_in, k_out):
    a = np.zeros(n, dtype=np.int64)
    b = np.zeros(n, dtype=np.int64)
    a[i] = k_in
    b[i] = k_out
    return a, b


def _codes(labels):
    return np.ascontiguousarray(labels, dtype=np.int64)


def kth_neighbours(points, labels, k_in, k_out):
    """Vectorised same-class / other-class k-th neighbour lookup.

    ``k_in`` and ``k_out`` are per-point ranks; a rank of 0 skips that lookup and
    yields -1. Callers are responsible for clamping ranks to what exists.
    """
    n = len(labels)
    k_in = np.broadcast_to(np.asarray(k_in, dtype=np.int64), (n,)).copy()
    k_out = np.broadcast_to(np.asarray(k_out, dtype=np.int64), (n,)).copy()
    return _kth_by_class(_as_points(points), _codes(labels), k_in, k_out)


def vote_distribution(points, labels, query, k, n_classes):
    """Class proportions among the ``k`` nearest points; one row per query."""
    P = _as_points(points)
    Q = _as_queries(query, P.shape[1])
    if k < 1 or k > P.shape[0]:
        raise InsufficientPoints(f"k={k} but only {P.shape[0]} points")
    probs = _vote_batch(P, _codes(labels), Q, int(k), int(n_classes))
    if np.ndim(query) <= 1 and Q.shape[0] == 1:
        return probs[0]
    return probs
