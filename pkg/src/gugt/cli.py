"""Command-line entry point: ``gugt <command> ...``.

Exit codes: 0 success, 1 data or validation error, 2 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import warnings
from pathlib import Path

import numpy as np

from .classifier import SvmModel, SvmParams, decision_function, svm_train
from .encoding import Codebook, bow_histogram, build_feature_vector, fit_codebook
from .errors import ConfigError, DataError, InvalidParameter, NonConvergence
from .evaluation import extract_all, repeat_evaluation, sweep_clusters
from .features import heel_depth_difference
from .pipeline import analyze_session
from .preprocess import FilterParams
from .segmentation import SegmentationParams, elbow_xdistance_signal, hip_depth_signal, plot_csv
from .skeleton_io import Label, LabeledDataset, load_sessions, save_session, validate_dataset
from .synthgen import generate_cohort, separable_cohort_profiles


def _default_seed() -> int:
    env = os.environ.get("GUGT_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise InvalidParameter(f"GUGT_SEED must be an integer, got {env!r}") from None


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def _seg_params(args) -> SegmentationParams:
    return SegmentationParams(
        args.seated_band, args.seated_min_s, args.turn_recovery, args.step_amplitude
    )


def _filter_params(args) -> FilterParams:
    return FilterParams(window=args.median_window)


def _svm_params(args) -> SvmParams:
    return SvmParams(C=args.C, gamma=args.gamma, kkt_tol=args.kkt_tol, max_passes=args.max_passes)


def _check_positive(name, value):
    if value < 1:
        raise InvalidParameter(f"{name} must be >= 1, got {value}")


def _labeled(args) -> LabeledDataset:
    return LabeledDataset(load_sessions(args.inputs))


# ---------------------------------------------------------------- commands


def cmd_validate(args) -> int:
    sessions = load_sessions(args.inputs)
    report = validate_dataset(sessions)
    for v in report.violations:
        print(f"{v.kind}\t{v.session or '-'}\t{v.message}")
    if not report.ok:
        print(report.violations[0].kind, file=sys.stderr)
        return 1
    print(f"ok: {len(sessions)} sessions")
    return 0


def cmd_simulate(args) -> int:
    _check_positive("--trials-min", args.trials_min)
    low, high = separable_cohort_profiles(noise_std_m=args.noise)
    ds, truths = generate_cohort(
        low, high, args.subjects_low, args.subjects_high,
        trials=(args.trials_min, args.trials_max), seed=args.seed, with_truth=True,
    )
    out = Path(args.out)
    for s in ds.sessions:
        stem = out / s.subject_id / f"{s.subject_id}_{s.trial_id}"
        stem.parent.mkdir(parents=True, exist_ok=True)
        save_session(s, stem.with_suffix("." + args.format))
        _write(stem.with_suffix(".truth.json"), truths[s.key].to_json())
    print(f"wrote {len(ds)} sessions for {len(ds.subjects)} subjects to {out}")
    return 0


def cmd_segment(args) -> int:
    out = Path(args.out)
    for s in load_sessions(args.inputs):
        a = analyze_session(s, _filter_params(args), _seg_params(args))
        seg = a.segmentation
        crossing = np.zeros(seg.n_frames, dtype=int)
        crossing[list(a.steps.crossing_frames)] = 1
        stem = f"{s.subject_id}_{s.trial_id}"
        _write(out / f"{stem}.hip_depth.csv", plot_csv(hip_depth_signal(a.session), seg))
        _write(out / f"{stem}.elbow_xdist.csv", plot_csv(elbow_xdistance_signal(a.session), seg))
        _write(out / f"{stem}.heel_diff.csv",
               plot_csv(heel_depth_difference(a.session), seg, {"crossing": crossing.tolist()}))
        flag = " no_recovery" if seg.no_recovery else ""
        print(f"{s.key}: turn_point={seg.turn_point} turning={seg.turning} "
              f"steps={a.steps.step_count}{flag}")
    return 0


def cmd_extract(args) -> int:
    sessions = load_sessions(args.inputs)
    feats = extract_all(sessions, _filter_params(args), _seg_params(args))
    out = Path(args.out)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["subject", "trial", "label", "num_steps", "avg_step_s", "turn_s", "error"])
    failed = []
    for s in sessions:
        f = feats[s.key]
        label = s.label.value or ""
        if not f.ok:
            failed.append(f)
            w.writerow([s.subject_id, s.trial_id, label, "", "", "", f.error])
            continue
        g = f.gait
        w.writerow([s.subject_id, s.trial_id, label, g.num_steps,
                    repr(g.avg_step_duration_s), repr(g.turn_duration_s), ""])
        _write(out / f"{s.subject_id}_{s.trial_id}.anatomical.csv", f.anatomy.to_csv())
        means = np.degrees(f.anatomy.values[:, 1:].mean(axis=0))
        print(f"{s.key}: steps={g.num_steps} avg_step={g.avg_step_duration_s:.3f}s "
              f"turn={g.turn_duration_s:.3f}s elbow={f.anatomy.values[:, 0].mean():.3f}m "
              f"leg={means[0]:.1f}deg kneeR={means[1]:.1f}deg kneeL={means[2]:.1f}deg")
    _write(out / "gait.csv", buf.getvalue())
    for f in failed:
        print(f"{f.key}: {f.error}", file=sys.stderr)
    return 1 if failed else 0


def cmd_encode(args) -> int:
    _check_positive("--k", args.k)
    feats = extract_all(load_sessions(args.inputs), _filter_params(args), _seg_params(args))
    streams = [f.anatomy.values for f in feats.values() if f.ok]
    if not streams:
        raise DataError("no session produced anatomical features")
    cb = fit_codebook(np.concatenate(streams), args.k, args.seed)
    _write(Path(args.out), cb.to_json())
    print(f"codebook M={cb.M} inertia={cb.inertia:.6g} -> {args.out}")
    return 0


def _vectors(sessions, codebook, args):
    feats = extract_all(sessions, _filter_params(args), _seg_params(args))
    rows, kept = [], []
    for s in sessions:
        f = feats[s.key]
        if not f.ok:
            print(f"{s.key}: skipped ({f.error})", file=sys.stderr)
            continue
        rows.append(build_feature_vector(f.gait, bow_histogram(codebook, f.anatomy.values)).values)
        kept.append(s)
    return np.array(rows), kept


def cmd_train(args) -> int:
    ds = _labeled(args)
    cb = Codebook.from_json(Path(args.codebook).read_text(encoding="utf-8"))
    X, kept = _vectors(ds.sessions, cb, args)
    y = np.array([s.label.sign for s in kept], dtype=float)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", NonConvergence)
        model = svm_train(X, y, _svm_params(args))
    for c in caught:
        print(f"warning: {c.message}", file=sys.stderr)
    _write(Path(args.out), model.to_json())
    print(f"model: {len(model.alpha_y)} support vectors, gamma={model.params.gamma:.6g} -> {args.out}")
    return 0


def cmd_predict(args) -> int:
    sessions = load_sessions(args.inputs)
    cb = Codebook.from_json(Path(args.codebook).read_text(encoding="utf-8"))
    model = SvmModel.from_json(Path(args.model).read_text(encoding="utf-8"))
    X, kept = _vectors(sessions, cb, args)
    if not kept:
        raise DataError("no session could be encoded")
    for s, d in zip(kept, decision_function(model, X)):
        print(f"{s.key}\t{Label.from_sign(d).value}\t{float(d)!r}")
    return 0 if len(kept) == len(sessions) else 1


def cmd_evaluate(args) -> int:
    _check_positive("--k", args.k)
    _check_positive("--reps", args.reps)
    svm = _svm_params(args)
    ds = _labeled(args)
    feats = extract_all(ds.sessions, _filter_params(args), _seg_params(args))
    report = repeat_evaluation(ds, args.k, svm, args.reps, args.seed, feats, tune=args.tune)
    if args.out:
        _write(Path(args.out), report.to_json())
    cm = np.array(report.mean_confusion)
    print(f"mean accuracy {report.mean_accuracy:.4f} +/- {report.std_accuracy:.4f} "
          f"over {args.reps} repetitions")
    print(f"mean confusion (rows true low/high, cols predicted low/high): {cm.tolist()}")
    if report.flagged:
        print(f"{len(report.flagged)} test samples failed extraction", file=sys.stderr)
    return 0


def cmd_sweep(args) -> int:
    _check_positive("--k-min", args.k_min)
    _check_positive("--reps", args.reps)
    if args.k_max < args.k_min:
        raise InvalidParameter("--k-max must be >= --k-min")
    svm = _svm_params(args)
    ds = _labeled(args)
    feats = extract_all(ds.sessions, _filter_params(args), _seg_params(args))
    res = sweep_clusters(ds, range(args.k_min, args.k_max + 1), svm, args.reps, args.seed, feats)
    if args.out:
        _write(Path(args.out), res.to_csv())
    else:
        sys.stdout.write(res.to_csv())
    print(f"best K = {res.best_k}", file=sys.stderr if not args.out else sys.stdout)
    return 0


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gugt", description="Get-up-and-go skeleton analysis pipeline")
    p.add_argument("--config", help="JSON file whose keys provide defaults for the flags")
    sub = p.add_subparsers(dest="command", required=True)

    def inputs(sp):
        sp.add_argument("inputs", nargs="+", help="session files or directories")

    def extraction(sp):
        g = sp.add_argument_group("extraction")
        g.add_argument("--median-window", type=int, default=5)
        g.add_argument("--seated-band", type=float, default=0.05)
        g.add_argument("--seated-min-s", type=float, default=0.5)
        g.add_argument("--turn-recovery", type=float, default=0.8)
        g.add_argument("--step-amplitude", type=float, default=0.05)

    def svm(sp):
        g = sp.add_argument_group("svm")
        g.add_argument("--C", type=float, default=1.0)
        g.add_argument("--gamma", type=float, default=None)
        g.add_argument("--kkt-tol", type=float, default=1e-3)
        g.add_argument("--max-passes", type=int, default=1000)

    sp = sub.add_parser("validate", help="check session files for data problems")
    inputs(sp)
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("simulate", help="generate a synthetic labeled cohort")
    sp.add_argument("--subjects-low", type=int, default=5)
    sp.add_argument("--subjects-high", type=int, default=7)
    sp.add_argument("--trials-min", type=int, default=3)
    sp.add_argument("--trials-max", type=int, default=6)
    sp.add_argument("--noise", type=float, default=0.005, help="joint noise std in meters")
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--format", choices=("jsonl", "csv"), default="jsonl")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("segment", help="write hip depth, elbow distance and heel difference CSVs")
    inputs(sp)
    extraction(sp)
    sp.add_argument("--out", default=".")
    sp.set_defaults(func=cmd_segment)

    sp = sub.add_parser("extract", help="write gait and anatomical feature CSVs")
    inputs(sp)
    extraction(sp)
    sp.add_argument("--out", default=".")
    sp.set_defaults(func=cmd_extract)

    sp = sub.add_parser("encode", help="fit a codebook on anatomical frames")
    inputs(sp)
    extraction(sp)
    sp.add_argument("--k", type=int, default=10)
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--out", default="codebook.json")
    sp.set_defaults(func=cmd_encode)

    sp = sub.add_parser("train", help="train the SVM on labeled sessions")
    inputs(sp)
    extraction(sp)
    svm(sp)
    sp.add_argument("--codebook", required=True)
    sp.add_argument("--out", default="model.json")
    sp.set_defaults(func=cmd_train)

    sp = sub.add_parser("predict", help="classify sessions with a trained model")
    inputs(sp)
    extraction(sp)
    sp.add_argument("--codebook", required=True)
    sp.add_argument("--model", required=True)
    sp.set_defaults(func=cmd_predict)

    sp = sub.add_parser("evaluate", help="repeated leave-one-subject-out evaluation")
    inputs(sp)
    extraction(sp)
    svm(sp)
    sp.add_argument("--k", type=int, default=10)
    sp.add_argument("--reps", type=int, default=10)
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--tune", action="store_true", help="grid-search C and gamma inside each fold")
    sp.add_argument("--out", default=None, help="EvalReport JSON path")
    sp.set_defaults(func=cmd_evaluate)

    sp = sub.add_parser("sweep", help="LOSO accuracy as a function of codebook size")
    inputs(sp)
    extraction(sp)
    svm(sp)
    sp.add_argument("--k-min", type=int, default=4)
    sp.add_argument("--k-max", type=int, default=24)
    sp.add_argument("--reps", type=int, default=10)
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--out", default=None, help="CSV path (stdout if omitted)")
    sp.set_defaults(func=cmd_sweep)
    return p


def _apply_config(parser: argparse.ArgumentParser, argv) -> argparse.Namespace:
    """Parse twice: once to find --config, then with its keys as defaults so
    explicit flags still win."""
    pre, _ = parser.parse_known_args(argv)
    if pre.config:
        try:
            cfg = json.loads(Path(pre.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise InvalidParameter(f"cannot read config {pre.config}: {exc}") from None
        if not isinstance(cfg, dict):
            raise InvalidParameter("config must be a JSON object")
        sub = parser._subparsers._group_actions[0].choices[pre.command]
        known = {a.dest for a in sub._actions}
        unknown = set(cfg) - known
        if unknown:
            raise InvalidParameter(f"unknown config keys: {sorted(unknown)}")
        sub.set_defaults(**cfg)
    return parser.parse_args(argv)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
        if getattr(args, "seed", 0) is None:
            args.seed = _default_seed()
        return args.func(args)
    except ConfigError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
