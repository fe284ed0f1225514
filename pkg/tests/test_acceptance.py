"""Acceptance checks, one test per criterion.

Each test records a single ``[PASS]``/``[FAIL]`` line with the measured
quantity through the ``report`` fixture; the lines are printed together in the
terminal summary.
"""

import time

import numpy as np
import pytest

from bopnn import BOPNNClassifier
from bopnn.cli import main as cli_main
from bopnn.dataio import SplitPlan, split_indices
from bopnn.datasets import make_informative_noise, write_csv
from bopnn.evalstats import standardize_minmax, standardize_student, wilcoxon_signed_rank
from bopnn.subspace import scatter_pair, solve_discriminant
from bopnn.tuning import fit_variant, plugin_pi_b

from conftest import random_pd
from oracles import knn_classify, scatter_double_loop

SPLITS = 10


def _synthetic_split(s):
    X, y = make_informative_noise(600, seed=s)
    train, test = split_indices(600, SplitPlan(repetitions=SPLITS), s, 7)
    return X[train], y[train], X[test], y[test]


@pytest.fixture(scope="module")
def default_fits():
    """Default-hyperparameter ensembles (B=100) on each synthetic split."""
    out = []
    for s in range(SPLITS):
        Xtr, ytr, Xte, yte = _synthetic_split(s)
        est = BOPNNClassifier(n_estimators=100, random_state=s).fit(Xtr, ytr)
        out.append((est, float(np.mean(est.predict(Xte) == yte))))
    return out


def test_c01_knn_reduction(report):
    rng = np.random.default_rng(101)
    t0 = time.perf_counter()
    mismatches = 0
    for _ in range(20):
        n, d, K = int(rng.integers(10, 201)), int(rng.integers(1, 11)), int(rng.integers(2, 5))
        # small integer grid forces distance and vote ties
        X = rng.integers(-3, 4, size=(n, d)).astype(float)
        y = rng.integers(1, K + 1, size=n)
        y[:K] = np.arange(1, K + 1)
        k = int(rng.integers(1, min(10, n) + 1))
        est = BOPNNClassifier(n_neighbors=k, subset_size=d, n_estimators=1, bag_fraction=1.0,
                              projection=False, random_state=0).fit(X, y)
        Q = np.vstack([X[:20], rng.integers(-3, 4, size=(30, d)).astype(float)])
        got = est.predict(Q)
        want = np.array([knn_classify(X, y, q, k) for q in Q])
        mismatches += int(np.sum(got != want))
    elapsed = time.perf_counter() - t0
    report(1, "kNN reduction", mismatches == 0 and elapsed < 10,
           f"mismatches={mismatches}, runtime={elapsed:.2f}s")


def test_c02_scatter_oracle(report):
    rng = np.random.default_rng(202)
    worst = 0.0
    for i in range(50):
        n, d, K = int(rng.integers(4, 60)), int(rng.integers(1, 8)), int(rng.integers(2, 5))
        X = rng.standard_normal((n, d))
        y = rng.integers(0, K, size=n)
        y[:2] = [0, 1]
        k = int(rng.integers(1, 6))
        for balanced in (False, True):
            got = scatter_pair(X, y, k, balanced=balanced)
            s_in, s_out = scatter_double_loop(X, y, k, balanced=balanced)
            worst = max(worst, np.abs(got.sigma_in - s_in).max(), np.abs(got.sigma_out - s_out).max())
    hand = scatter_pair(np.array([[0.0, 0], [0, 0], [1, 1], [1, 1]]), np.array([0, 0, 1, 1]), 1)
    hand_ok = np.array_equal(hand.sigma_in, np.zeros((2, 2))) and np.allclose(hand.sigma_out, 1, atol=1e-12)
    report(2, "scatter oracle", worst <= 1e-12 and hand_ok, f"max abs error={worst:.2e}, hand case={hand_ok}")


def test_c03_eigen_residuals(report):
    rng = np.random.default_rng(303)
    worst = 0.0
    for _ in range(100):
        dim = int(rng.integers(1, 31))
        s_in, s_out = random_pd(rng, dim), random_pd(rng, dim)
        eig, ridge = solve_discriminant(s_out, s_in)
        Bm = s_in + ridge * np.eye(dim)
        res = s_out @ eig.vectors - (Bm @ eig.vectors) * eig.values
        worst = max(worst, np.linalg.norm(res, axis=0).max() / np.linalg.norm(s_out))
    report(3, "generalized eigen residuals", worst <= 1e-8, f"max relative residual={worst:.2e}")


@pytest.mark.slow
def test_c04_adaptive_step_benefit(report):
    t0 = time.perf_counter()
    gaps = []
    for s in range(SPLITS):
        Xtr, ytr, Xte, yte = _synthetic_split(s)
        acc = {}
        for variant in ("bopnn", "bopnn-noproj"):
            est, _ = fit_variant(variant, Xtr, ytr, n_draws=30, B=100, seed=100 + s)
            acc[variant] = float(np.mean(est.predict(Xte) == yte))
        gaps.append(acc["bopnn"] - acc["bopnn-noproj"])
    elapsed = time.perf_counter() - t0
    gap = float(np.mean(gaps))
    report(4, "tuned projection beats tuned no-projection", gap >= 0.03 and elapsed < 300,
           f"mean gap={gap:.4f}, runtime={elapsed:.1f}s")


@pytest.mark.slow
def test_c05_oob_fidelity(report, default_fits):
    diffs = [abs(est.oob_score_ - acc) for est, acc in default_fits]
    mean = float(np.mean(diffs))
    report(5, "OOB fidelity", mean <= 0.05, f"mean |oob - test|={mean:.4f}")


@pytest.mark.slow
def test_c06_importance_separation(report, default_fits):
    wins, worst_sum = 0, 0.0
    for est, _ in default_fits:
        imp = est.feature_importances_
        wins += int(imp[:2].mean() > imp[2:].max())
        expected = np.mean([m.discriminant.values.sum() for m in est.estimators_])
        worst_sum = max(worst_sum, abs(imp.sum() - expected))
    report(6, "importance separation", wins >= 9 and worst_sum <= 1e-10,
           f"wins={wins}/{SPLITS}, sum identity error={worst_sum:.1e}")


def test_c07_plugin_formula(report):
    a, b = plugin_pi_b(2, 4), plugin_pi_b(4, 2)
    clamp = all(plugin_pi_b(p, 1) == 0.9 for p in range(1, 11))
    ok = abs(a - 0.5) <= 1e-12 and abs(b - 0.93999) <= 1e-5 and clamp
    report(7, "plug-in bag fraction", ok, f"(2,4)->{a:.6f}, (4,2)->{b:.6f}, clamp={clamp}")


def test_c08_wilcoxon(report):
    w, p = wilcoxon_signed_rank([1, 2, 3, 4, 5], [0, 0, 0, 0, 0])
    ok = w == 15 and abs(p - 0.0625) <= 1e-12
    rng = np.random.default_rng(808)
    for _ in range(50):
        n = int(rng.integers(1, 30))
        a, b = rng.integers(0, 6, n).astype(float), rng.integers(0, 6, n).astype(float)
        w_ab, p_ab = wilcoxon_signed_rank(a, b)
        w_ba, p_ba = wilcoxon_signed_rank(b, a)
        m = int(np.sum(a != b))
        ok &= abs(p_ab - p_ba) <= 1e-12 and abs(w_ab + w_ba - m * (m + 1) / 2) <= 1e-9
    ok &= wilcoxon_signed_rank([0.3, 0.4], [0.3, 0.4]) == (0.0, 1.0)
    report(8, "Wilcoxon signed-rank", ok, f"W+={w}, p={p}")


def test_c09_standardizations(report):
    rng = np.random.default_rng(909)
    in_range, worst = True, 0.0
    for _ in range(100):
        # datasets x methods x splits
        T = rng.random((int(rng.integers(1, 6)), int(rng.integers(2, 8)), int(rng.integers(1, 12))))
        for A in T:
            M, S = standardize_minmax(A), standardize_student(A)
            in_range &= bool(np.all(M.min(axis=0) == 0.0) and np.all(M.max(axis=0) == 1.0))
            worst = max(worst, np.abs(S.mean(axis=0)).max(), np.abs(S.std(axis=0, ddof=1) - 1).max())
    report(9, "standardizations", in_range and worst <= 1e-12,
           f"range ok={in_range}, max moment error={worst:.1e}")


def test_c10_thread_determinism(report, tmp_path):
    X, y = make_informative_noise(300, seed=3)
    data = tmp_path / "syn.csv"
    write_csv(data, X, y)
    blobs = []
    for threads in (1, 2, 8):
        out = tmp_path / f"m{threads}.bopnn.json"
        code = cli_main(["train", "--input", str(data), "--out", str(out), "--B", "40",
                         "--seed", "11", "--threads", str(threads)])
        assert code == 0
        blobs.append(out.read_bytes())
    same = blobs[0] == blobs[1] == blobs[2]
    report(10, "thread-count determinism", same, f"identical files across 1/2/8 threads={same}")


def test_c11_ensemble_projection(report):
    rng = np.random.default_rng(1111)
    sym = trace = 0.0
    min_eig = np.inf
    for _ in range(20):
        n, d = int(rng.integers(30, 90)), int(rng.integers(2, 12))
        X = rng.standard_normal((n, d))
        y = rng.integers(1, 4, n)
        q0 = int(rng.integers(1, d + 1))
        q = int(rng.integers(1, q0 + 1))
        est = BOPNNClassifier(n_neighbors=int(rng.integers(1, 4)), subset_size=q0, n_components=q,
                              n_estimators=int(rng.integers(1, 25)), random_state=int(rng.integers(1000))).fit(X, y)
        P = est.ensemble_projection_
        sym = max(sym, np.abs(P - P.T).max())
        min_eig = min(min_eig, np.linalg.eigvalsh(P).min())
        trace = max(trace, abs(np.trace(P) - q))
    ok = sym <= 1e-12 and min_eig >= -1e-9 and trace <= 1e-9
    report(11, "ensemble projection", ok,
           f"asymmetry={sym:.1e}, min eigenvalue={min_eig:.1e}, trace error={trace:.1e}")
