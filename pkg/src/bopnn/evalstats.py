"""Accuracy, per-split standardisation of accuracies, and the Wilcoxon signed-rank test.

Accuracy tensors are arrays of shape (n_methods, n_splits) for one dataset.
"""

import math

import numpy as np

EXACT_MAX_N = 20


def accuracy(pred, truth):
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.shape != truth.shape or pred.size == 0:
        raise ValueError("pred and truth must be non-empty and of equal length")
    return float(np.mean(pred == truth))


def _as_tensor(A):
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2:
        raise ValueError("accuracy tensor must have shape (n_methods, n_splits)")
    return A


def standardize_minmax(A):
    """Rescale each split column to [0, 1]; columns where all methods tie become 0.5."""
    A = _as_tensor(A)
    lo = A.min(axis=0)
    span = A.max(axis=0) - lo
    out = np.full_like(A, 0.5)
    ok = span > 0
    out[:, ok] = (A[:, ok] - lo[ok]) / span[ok]
    return out


def standardize_student(A):
    """Studentise each split column (sample sd, divisor M-1); tied columns become 0."""
    A = _as_tensor(A)
    if A.shape[0] < 2:
        raise ValueError("studentising needs at least two methods")
    mean = A.mean(axis=0)
    sd = A.std(axis=0, ddof=1)
    out = np.zeros_like(A)
    ok = sd > 0
    out[:, ok] = (A[:, ok] - mean[ok]) / sd[ok]
    return out


def dataset_score(A_std, method):
    return float(np.mean(_as_tensor(A_std)[method]))


def midranks(values):
    """Ranks 1..n with tied values sharing their mean rank."""
    values = np.asarray(values, dtype=np.float64)
    order = np.argsort(values, kind="stable")
    ranks = np.empty(values.shape[0])
    sorted_vals = values[order]
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i:j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def _signed_rank_counts(doubled_ranks):
    # counts[s] = number of sign patterns whose doubled positive-rank sum is s.
    counts = np.zeros(int(doubled_ranks.sum()) + 1, dtype=np.float64)
    counts[0] = 1.0
    for r in doubled_ranks.astype(np.int64):
        shifted = np.zeros_like(counts)
        shifted[r:] = counts[:-r] if r else counts
        counts = counts + shifted
    return counts


def wilcoxon_signed_rank(a, b, method="auto"):
    """Paired signed-rank test of ``a - b``; returns ``(W+, two-sided p)``.

    Zero differences are dropped and tied magnitudes get mid-ranks. The exact
    null distribution (every sign pattern equally likely) is used for up to
    20 non-zero differences under ``method="auto"``; otherwise a normal
    approximation with tie-corrected variance and 0.5 continuity correction.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1 or a.size == 0:
        raise ValueError("a and b must be 1-D, non-empty and of equal length")
    if method not in ("auto", "exact", "approx"):
        raise ValueError(f"unknown method {method!r}")
    diff = a - b
    diff = diff[diff != 0]
    n = diff.shape[0]
    if n == 0:
        return 0.0, 1.0
    ranks = midranks(np.abs(diff))
    w_plus = float(ranks[diff > 0].sum())
    if method == "exact" or (method == "auto" and n <= EXACT_MAX_N):
        counts = _signed_rank_counts(2 * ranks)
        total = counts.sum()
        w2 = int(round(2 * w_plus))
        upper = counts[w2:].sum() / total
        lower = counts[:w2 + 1].sum() / total
        return w_plus, min(1.0, 2.0 * min(upper, lower))
    mean = n * (n + 1) / 4.0
    _, tie_sizes = np.unique(np.abs(diff), return_counts=True)
    var = n * (n + 1) * (2 * n + 1) / 24.0 - np.sum(tie_sizes**3 - tie_sizes) / 48.0
    if var <= 0:
        return w_plus, 1.0
    z = max(abs(w_plus - mean) - 0.5, 0.0) / math.sqrt(var)
    return w_plus, min(1.0, math.erfc(z / math.sqrt(2.0)))
