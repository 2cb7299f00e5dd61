"""Command-line interface.

Subcommands: detect (stream scoring), sweep (grid experiment), synth
(synthetic stream generation), scale (robust scaler fit/apply), bench
(kernel backend comparison). Option precedence is flags > config file >
defaults.
"""

from __future__ import annotations

import argparse
import math
import sys
from typing import Dict, Optional

import numpy as np

from .bench import format_results, run_benchmark
from .data import (
    Dataset,
    ScalerParams,
    SynthSpec,
    apply_scaler,
    load_csv,
    robust_scale,
    select_subset,
    synth_stream,
    write_csv,
)
from .engine import EngineConfig, run_stream
from .experiment import (
    ExperimentSpec,
    parse_bool,
    parse_kv_file,
    prepare_stream,
    run_experiment,
    scored_labels,
    write_scores_csv,
)
from .lsh import _MASK64, SUBSET_TAG
from .metrics import build_report

DETECT_DEFAULTS: Dict[str, object] = {
    "input": None,
    "label_column": None,
    "window_size": 128,
    "num_trees": 60,
    "threshold": 0.65,
    "seed": 1,
    "subset_size": None,
    "no_sampling": False,
    "score_initial_window": False,
    "scores_out": None,
    "metrics_out": None,
    "record_latency": False,
    "scale_mode": "full",
    "width": 1.0,
    "granularity": 1.0,
}

_DETECT_COERCE = {
    "input": str,
    "label_column": str,
    "window_size": int,
    "num_trees": int,
    "threshold": float,
    "seed": int,
    "subset_size": int,
    "no_sampling": parse_bool,
    "score_initial_window": parse_bool,
    "scores_out": str,
    "metrics_out": str,
    "record_latency": parse_bool,
    "scale_mode": str,
    "width": float,
    "granularity": float,
}


def _merge_detect_options(args: argparse.Namespace) -> Dict[str, object]:
    merged = dict(DETECT_DEFAULTS)
    if args.config:
        for key, value in parse_kv_file(args.config).items():
            if key not in _DETECT_COERCE:
                raise SystemExit(f"error: unknown config key {key!r}")
            merged[key] = _DETECT_COERCE[key](value)
    for key in DETECT_DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value
    if merged["input"] is None:
        raise SystemExit("error: --input (or config key input=) is required")
    return merged


def _cmd_detect(args: argparse.Namespace) -> int:
    opts = _merge_detect_options(args)
    dataset = load_csv(opts["input"], opts["label_column"])
    if opts["scale_mode"] == "full":
        dataset, _ = robust_scale(dataset)
    if opts["subset_size"] is not None:
        rng = np.random.default_rng([int(opts["seed"]) & _MASK64, SUBSET_TAG, 0])
        dataset = select_subset(dataset, int(opts["subset_size"]), rng)
    if opts["scale_mode"] == "bootstrap":
        dataset = prepare_stream(dataset, "bootstrap", int(opts["window_size"]))
    config = EngineConfig(
        window_size=int(opts["window_size"]),
        num_trees=int(opts["num_trees"]),
        threshold=float(opts["threshold"]),
        seed=int(opts["seed"]),
        score_initial_window=bool(opts["score_initial_window"]),
        sampling_enabled=not bool(opts["no_sampling"]),
        width=float(opts["width"]),
        granularity=float(opts["granularity"]),
    )
    records, engine = run_stream(dataset.points, config, return_engine=True)
    if opts["scores_out"]:
        write_scores_csv(opts["scores_out"], records, bool(opts["record_latency"]))
    report = build_report(
        records,
        scored_labels(records, dataset),
        float(opts["threshold"]),
        engine.rebuild_ns,
    )
    if opts["metrics_out"]:
        with open(opts["metrics_out"], "w") as fh:
            fh.write(report.to_text())
    line = (
        f"scored {report.n_points} points, {report.n_anomalies} anomalies "
        f"(threshold {config.threshold:g}), {engine.rebuild_epoch} rebuilds, "
        f"{engine.rejected_count} rejected"
    )
    if not math.isnan(report.auc):
        line += f", auc {report.auc:.4f}, f1 {report.f1:.4f}"
    print(line)
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    spec = ExperimentSpec.from_config(parse_kv_file(args.config))
    summary = run_experiment(spec)
    print(f"sweep complete: {summary}")
    return 0


def _cmd_synth(args: argparse.Namespace) -> int:
    spec = SynthSpec(
        n=args.n,
        dims=args.dims,
        outlier_rate=args.outlier_rate,
        drift_at=args.drift_at,
        inlier_std=args.inlier_std,
        drift_shift=args.drift_shift,
        seed=args.seed,
    )
    dataset = synth_stream(spec)
    write_csv(dataset, args.output)
    print(
        f"wrote {dataset.n} rows ({int(dataset.labels.sum())} outliers) "
        f"to {args.output}"
    )
    return 0


def _cmd_scale(args: argparse.Namespace) -> int:
    dataset = load_csv(args.input, args.label_column)
    if args.params_in:
        with open(args.params_in) as fh:
            params = ScalerParams.from_json(fh.read())
        scaled = apply_scaler(dataset, params)
    else:
        scaled, params = robust_scale(dataset)
    if args.output:
        write_csv(scaled, args.output, args.label_column or "label")
        print(f"wrote scaled data to {args.output}")
    if args.params_out:
        with open(args.params_out, "w") as fh:
            fh.write(params.to_json())
        print(f"wrote scaler parameters to {args.params_out}")
    return 0


def _cmd_bench(args: argparse.Namespace) -> int:
    results = run_benchmark(
        n_points=args.n,
        dims=args.dims,
        window_size=args.window_size,
        num_trees=args.num_trees,
        seed=args.seed,
        passes=args.passes,
    )
    print(format_results(results))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lshstream",
        description="Streaming anomaly detection with LSH isolation forests.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    detect = sub.add_parser("detect", help="score a stream from a CSV file")
    detect.add_argument("--input", help="headered CSV of numeric columns")
    detect.add_argument("--label-column", dest="label_column")
    detect.add_argument("--window-size", dest="window_size", type=int)
    detect.add_argument("--num-trees", dest="num_trees", type=int)
    detect.add_argument("--threshold", type=float)
    detect.add_argument("--seed", type=int)
    detect.add_argument("--subset-size", dest="subset_size", type=int)
    detect.add_argument(
        "--no-sampling",
        dest="no_sampling",
        action="store_const",
        const=True,
        help="build every tree from the whole window",
    )
    detect.add_argument(
        "--score-initial-window",
        dest="score_initial_window",
        action="store_const",
        const=True,
        help="also score the bootstrap window retrospectively",
    )
    detect.add_argument("--scores-out", dest="scores_out")
    detect.add_argument("--metrics-out", dest="metrics_out")
    detect.add_argument(
        "--record-latency",
        dest="record_latency",
        action="store_const",
        const=True,
        help="write measured per-point latencies into the scores CSV "
        "(makes the file non-reproducible)",
    )
    detect.add_argument("--config", help="flat key=value config file")
    detect.set_defaults(func=_cmd_detect)

    sweep = sub.add_parser("sweep", help="run a (w, t, b) grid experiment")
    sweep.add_argument("--config", required=True, help="flat key=value sweep config")
    sweep.set_defaults(func=_cmd_sweep)

    synth = sub.add_parser("synth", help="generate a labeled synthetic stream")
    synth.add_argument("--n", type=int, required=True)
    synth.add_argument("--dims", type=int, default=6)
    synth.add_argument("--outlier-rate", dest="outlier_rate", type=float, default=0.02)
    synth.add_argument("--drift-at", dest="drift_at", type=int, default=None)
    synth.add_argument("--drift-shift", dest="drift_shift", type=float, default=4.0)
    synth.add_argument("--inlier-std", dest="inlier_std", type=float, default=1.0)
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument("--output", required=True)
    synth.set_defaults(func=_cmd_synth)

    scale = sub.add_parser("scale", help="fit and/or apply the robust scaler")
    scale.add_argument("--input", required=True)
    scale.add_argument("--output")
    scale.add_argument("--label-column", dest="label_column")
    scale.add_argument("--params-out", dest="params_out")
    scale.add_argument("--params-in", dest="params_in")
    scale.set_defaults(func=_cmd_scale)

    bench = sub.add_parser("bench", help="compare scoring kernel backends")
    bench.add_argument("--n", type=int, default=2000, help="points to score")
    bench.add_argument("--dims", type=int, default=6)
    bench.add_argument("--window-size", dest="window_size", type=int, default=128)
    bench.add_argument("--num-trees", dest="num_trees", type=int, default=60)
    bench.add_argument("--seed", type=int, default=1)
    bench.add_argument("--passes", type=int, default=3)
    bench.set_defaults(func=_cmd_bench)

    return parser


def main(argv: Optional[list] = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
