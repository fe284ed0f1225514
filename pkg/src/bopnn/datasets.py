"""Synthetic classification problems used by the examples and tests."""

import numpy as np


def make_informative_noise(n=600, n_noise=18, mean=0.9, seed=0):
    """Four Gaussian classes separated only by the first two columns.

    Class centres sit at ``(+-mean, +-mean)`` on the two informative columns,
    so neither column alone identifies the class. Within-class sd there is
    ``sqrt(1 - mean**2)``, which gives every column, informative or noise, unit
    marginal variance. Labels are ``1..4``.
    """
    if not 0 < mean < 1:
        raise ValueError("mean must lie in (0, 1) to keep unit marginal variance")
    rng = np.random.default_rng(seed)
    signs = rng.choice([-1.0, 1.0], size=(n, 2))
    X = rng.standard_normal((n, 2 + n_noise))
    X[:, :2] = mean * signs + np.sqrt(1.0 - mean**2) * X[:, :2]
    y = (2 * (signs[:, 0] > 0) + (signs[:, 1] > 0) + 1).astype(np.int64)
    return X, y


def make_blobs(n=200, d=2, n_classes=2, spread=0.5, separation=6.0, seed=0):
    """Well-separated isotropic Gaussian blobs with labels ``1..n_classes``."""
    rng = np.random.default_rng(seed)
    centres = separation * np.eye(max(d, n_classes))[:n_classes, :d]
    y = np.arange(n) % n_classes + 1
    X = centres[y - 1] + spread * rng.standard_normal((n, d))
    return X, y


def write_csv(path, X, y, header=None):
    header = header or [f"x{j + 1}" for j in range(X.shape[1])] + ["class"]
    lines = [",".join(header)]
    for row, label in zip(X, y):
        lines.append(",".join(repr(float(v)) for v in row) + f",{label}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
