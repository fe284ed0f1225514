"""Command-line interface: ``bopnn {train,tune,predict,importance,project,bench}``.

Exit codes: 0 success, 1 internal error, 2 usage or input error.
"""

import argparse
import csv
import io
import sys
import time
from pathlib import Path

import numpy as np

from ._rng import DEFAULT_SEED
from .dataio import (
    ColumnSchema,
    SplitPlan,
    ZScore,
    load_features,
    load_table,
    repetitions_for,
    split,
)
from .evalstats import accuracy, standardize_minmax, standardize_student, wilcoxon_signed_rank
from .exceptions import BOPNNError, ConvergenceFailure, NotPositiveDefinite
from .persist import SUFFIX, load_model, save_model
from .tuning import VARIANTS, fit_variant

EXIT_OK, EXIT_INTERNAL, EXIT_USAGE = 0, 1, 2


def _write_csv(path, header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    Path(path).write_text(buf.getvalue(), encoding="utf-8")


def _fmt(x):
    return repr(float(x))


def _report(**items):
    for key, value in items.items():
        print(f"{key}={value}")


def _load_training(args):
    ds = load_table(args.input, args.target)
    scaler = None
    X = ds.X
    if args.z_score:
        scaler = ZScore.fit(X)
        X = scaler.transform(X)
    return ds, X, scaler


def _variant(args):
    if args.variant == "bopnn" and args.no_projection:
        return "bopnn-noproj"
    return args.variant


def _fixed_params(args):
    fixed = {}
    if args.k is not None:
        fixed["n_neighbors"] = args.k
    if args.q0 is not None:
        fixed["subset_size"] = args.q0
    if args.q is not None:
        fixed["n_components"] = args.q
    fixed["bag_fraction"] = args.pi_b
    return fixed


def _fit(args, X, y, tune_search):
    return fit_variant(
        _variant(args), X, y, n_draws=args.trials, B=args.B, seed=args.seed,
        n_jobs=args.threads, tune_search=tune_search, balanced=args.balanced,
        **_fixed_params(args),
    )


def _metadata(ds, scaler, variant):
    return {
        "schema": [c.to_dict() for c in ds.schema],
        "class_names": ds.class_names,
        "target": ds.target,
        "feature_names": ds.feature_names,
        "scaling": None if scaler is None else scaler.to_dict(),
        "variant": variant,
    }


def _default_out(args, suffix=SUFFIX):
    return args.out or str(Path(args.input).with_suffix("")) + suffix


def _fit_report(est, elapsed, variant):
    hp = est.hyperparams_
    _report(
        variant=variant, k=hp.k, q0=hp.q0, q=hp.q, B=hp.B, pi_b=hp.pi_b,
        projection=str(hp.projection).lower(),
        oob_accuracy="nan" if est.oob_score_ is None else _fmt(est.oob_score_),
        wall_time=f"{elapsed:.3f}",
    )


def cmd_train(args):
    ds, X, scaler = _load_training(args)
    start = time.perf_counter()
    est, _ = _fit(args, X, ds.y, tune_search=args.tune)
    out = _default_out(args)
    save_model(est, out, **_metadata(ds, scaler, _variant(args)))
    _fit_report(est, time.perf_counter() - start, _variant(args))
    _report(model=out)


def cmd_tune(args):
    ds, X, scaler = _load_training(args)
    start = time.perf_counter()
    est, result = _fit(args, X, ds.y, tune_search=True)
    out = _default_out(args)
    save_model(est, out, **_metadata(ds, scaler, _variant(args)))
    report = args.report or out.removesuffix(SUFFIX) + ".trials.csv"
    if result is not None:
        _write_csv(report, ["trial", "k", "q0", "q", "oob"],
                   [[t + 1, hp.k, hp.q0, hp.q, _fmt(score)] for t, (hp, score) in enumerate(result.trials)])
        _report(chosen_trial=result.chosen + 1, trials_csv=report)
    _fit_report(est, time.perf_counter() - start, _variant(args))
    _report(model=out)


def _model_and_features(args):
    if not args.model:
        raise BOPNNError("--model is required")
    est = load_model(args.model)
    meta = est.metadata_
    X = y = None
    if args.input:
        schema = [ColumnSchema.from_dict(c) for c in meta["schema"]]
        X, y = load_features(args.input, schema, meta.get("target"), meta.get("class_names"))
        if meta.get("scaling"):
            X = ZScore.from_dict(meta["scaling"]).transform(X)
    return est, meta, X, y


def cmd_predict(args):
    est, meta, X, y = _model_and_features(args)
    if X is None:
        raise BOPNNError("--input is required")
    probs = est.predict_proba(X)
    names = meta.get("class_names") or [str(c) for c in est.classes_]
    codes = np.argmax(probs, axis=1)
    rows = [[i + 1, names[c]] + [_fmt(p) for p in row] for i, (c, row) in enumerate(zip(codes, probs))]
    header = ["id", "predicted_label"] + [f"prob_{j + 1}" for j in range(probs.shape[1])]
    out = args.out or "predictions.csv"
    _write_csv(out, header, rows)
    _report(n=len(rows), predictions=out)
    if y is not None:
        _report(accuracy=_fmt(accuracy(est.classes_[codes], y)))


def cmd_importance(args):
    est, meta, _, _ = _model_and_features(args)
    scores = est.feature_importances_
    names = meta.get("feature_names") or [f"x{j + 1}" for j in range(scores.shape[0])]
    out = args.out or "importance.csv"
    _write_csv(out, ["variable", "importance"], [[n, _fmt(s)] for n, s in zip(names, scores)])
    _report(importance=out)


def cmd_project(args):
    est, meta, X, y = _model_and_features(args)
    if X is None:
        raise BOPNNError("--input is required")
    coords = est.project(X, args.view_dims)
    names = meta.get("class_names") or [str(c) for c in est.classes_]
    labels = y if y is not None else est.predict(X)
    header = ["id"] + [f"pc{j + 1}" for j in range(coords.shape[1])] + ["label"]
    idx = np.searchsorted(est.classes_, labels)
    rows = [[i + 1] + [_fmt(v) for v in row] + [names[c]] for i, (row, c) in enumerate(zip(coords, idx))]
    out = args.out or "projection.csv"
    _write_csv(out, header, rows)
    _report(projection=out)


def cmd_bench(args):
    ds = load_table(args.input, args.target)
    variants = [v.strip() for v in args.variants.split(",") if v.strip()]
    for v in variants:
        if v not in VARIANTS:
            raise BOPNNError(f"unknown variant {v!r}")
    n = ds.X.shape[0]
    reps = args.repetitions or repetitions_for(n)
    plan = SplitPlan(repetitions=reps)
    acc = np.zeros((len(variants), reps))
    for t in range(reps):
        train, test = split(ds, plan, t, args.seed)
        Xtr, Xte = train.X, test.X
        if args.z_score:
            scaler = ZScore.fit(Xtr)
            Xtr, Xte = scaler.transform(Xtr), scaler.transform(Xte)
        for m, v in enumerate(variants):
            est, _ = fit_variant(v, Xtr, train.y, n_draws=args.trials, B=args.B,
                                 seed=args.seed + t, n_jobs=args.threads, balanced=args.balanced)
            acc[m, t] = accuracy(est.predict(Xte), test.y)
    out = Path(args.out or "bench")
    out.mkdir(parents=True, exist_ok=True)
    dataset = Path(args.input).name
    _write_csv(out / "splits.csv", ["dataset", "split", "method", "accuracy"],
               [[dataset, t + 1, v, _fmt(acc[m, t])] for t in range(reps) for m, v in enumerate(variants)])
    mm = standardize_minmax(acc)
    st = standardize_student(acc) if len(variants) > 1 else np.zeros_like(acc)
    _write_csv(out / "scores.csv", ["dataset", "method", "score_minmax", "score_student"],
               [[dataset, v, _fmt(mm[m].mean()), _fmt(st[m].mean())] for m, v in enumerate(variants)])
    pairs = []
    for a in range(len(variants)):
        for b in range(a + 1, len(variants)):
            w, p = wilcoxon_signed_rank(acc[a], acc[b])
            pairs.append([variants[a], variants[b], _fmt(w), _fmt(p), _fmt(np.mean(acc[a] - acc[b]))])
    _write_csv(out / "pairwise.csv", ["method_a", "method_b", "w_plus", "p_value", "mean_diff"], pairs)
    _report(dataset=dataset, n=n, repetitions=reps, out=str(out))
    for m, v in enumerate(variants):
        _report(**{f"mean_accuracy[{v}]": _fmt(acc[m].mean())})
    for row in pairs:
        _report(**{f"wilcoxon_p[{row[0]}:{row[1]}]": row[3]})


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", help="CSV/TSV data file (header row required)")
    common.add_argument("--target", help="target column name (default: last column)")
    common.add_argument("--model", help="model file for predict/importance/project")
    common.add_argument("--variant", choices=VARIANTS, default="bopnn")
    common.add_argument("--k", type=int)
    common.add_argument("--q0", type=int)
    common.add_argument("--q", type=int)
    common.add_argument("--B", type=int, default=100)
    common.add_argument("--pi-b", dest="pi_b", type=float, default=0.63)
    common.add_argument("--balanced", action="store_true")
    common.add_argument("--no-projection", dest="no_projection", action="store_true")
    common.add_argument("--z-score", dest="z_score", action="store_true")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED)
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--out")
    common.add_argument("--trials", type=int, default=30)
    common.add_argument("--view-dims", dest="view_dims", type=int, default=2)

    parser = argparse.ArgumentParser(prog="bopnn", description="Bags of projected nearest neighbours")
    sub = parser.add_subparsers(dest="command", required=True)
    train = sub.add_parser("train", parents=[common], help="fit and save a model")
    train.add_argument("--tune", action="store_true", help="random-search k, q0, q first")
    tune = sub.add_parser("tune", parents=[common], help="random search, save trials and best model")
    tune.add_argument("--report", help="trial CSV path")
    sub.add_parser("predict", parents=[common], help="class probabilities for new rows")
    sub.add_parser("importance", parents=[common], help="variable importance CSV")
    sub.add_parser("project", parents=[common], help="2-D ensemble projection CSV")
    bench = sub.add_parser("bench", parents=[common], help="repeated split comparison of variants")
    bench.add_argument("--variants", default="bopnn,bopnn-noproj")
    bench.add_argument("--repetitions", type=int, help="override the size-based schedule")
    return parser


COMMANDS = {
    "train": cmd_train,
    "tune": cmd_tune,
    "predict": cmd_predict,
    "importance": cmd_importance,
    "project": cmd_project,
    "bench": cmd_bench,
}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code
    if args.command in ("train", "tune", "bench") and not args.input:
        print("error: --input is required", file=sys.stderr)
        return EXIT_USAGE
    try:
        COMMANDS[args.command](args)
    except (ConvergenceFailure, NotPositiveDefinite) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except (BOPNNError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
