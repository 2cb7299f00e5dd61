"""Grid experiments: repeated seeded runs over (window, trees, subset) cells.

Each cell run selects a fresh contiguous subset, streams it through the
engine, and records metrics; repeats are averaged per cell and the sweep
emits one summary row per cell. Cell seeds derive from the master seed, so
everything except measured wall times is reproducible.
"""

from __future__ import annotations

import traceback
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from .data import Dataset, load_csv, robust_scale, select_subset
from .engine import EngineConfig, run_stream
from .lsh import _MASK64, SUBSET_TAG
from .metrics import MetricsReport, aggregate_runs, build_report

__all__ = [
    "ExperimentSpec",
    "parse_kv_file",
    "parse_bool",
    "write_scores_csv",
    "scored_labels",
    "prepare_stream",
    "run_experiment",
]

_RUN_TAG = 5


def parse_bool(value: str) -> bool:
    lowered = value.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {value!r}")


def parse_kv_file(path) -> Dict[str, str]:
    """Parse a flat key=value config file; '#' starts a comment line."""
    out: Dict[str, str] = {}
    with open(path) as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{line_no}: expected key=value, got {line!r}")
            key, _, value = line.partition("=")
            out[key.strip()] = value.strip()
    return out


def _int_list(value: str) -> List[int]:
    return [int(part) for part in value.replace(" ", "").split(",") if part]


@dataclass
class ExperimentSpec:
    """One sweep: grids over window size, tree count and subset size."""

    input: str
    out_dir: str
    label_column: Optional[str] = None
    window_sizes: List[int] = field(default_factory=lambda: [128])
    tree_counts: List[int] = field(default_factory=lambda: [60])
    subset_sizes: List[int] = field(default_factory=lambda: [10000])
    repeats: int = 60
    seed: int = 1
    threshold: float = 0.65
    scale_mode: str = "full"
    sampling: bool = True
    score_initial_window: bool = False
    record_latency: bool = False
    width: float = 1.0
    granularity: float = 1.0

    def __post_init__(self):
        if not self.window_sizes or not self.tree_counts or not self.subset_sizes:
            raise ValueError("window_sizes, tree_counts and subset_sizes are required")
        if self.repeats < 1:
            raise ValueError(f"repeats must be >= 1, got {self.repeats}")
        if self.scale_mode not in ("full", "bootstrap", "none"):
            raise ValueError(f"unknown scale_mode {self.scale_mode!r}")

    @classmethod
    def from_config(cls, raw: Dict[str, str]) -> "ExperimentSpec":
        known = {
            "input": str,
            "out_dir": str,
            "label_column": str,
            "window_sizes": _int_list,
            "tree_counts": _int_list,
            "subset_sizes": _int_list,
            "repeats": int,
            "seed": int,
            "threshold": float,
            "scale_mode": str,
            "sampling": parse_bool,
            "score_initial_window": parse_bool,
            "record_latency": parse_bool,
            "width": float,
            "granularity": float,
        }
        kwargs = {}
        for key, value in raw.items():
            if key not in known:
                raise ValueError(f"unknown sweep config key {key!r}")
            kwargs[key] = known[key](value)
        if "input" not in kwargs or "out_dir" not in kwargs:
            raise ValueError("sweep config requires 'input' and 'out_dir'")
        return cls(**kwargs)


def write_scores_csv(path, records: Sequence, include_latency: bool = False) -> None:
    """Write the per-point scores file.

    The latency column is zeroed unless include_latency is set: wall times
    are inherently non-reproducible, and the scores file is the diffable
    artifact (measured latencies always live in the metrics report).
    """
    with open(path, "w", newline="") as fh:
        fh.write("point_index,score,is_anomaly,latency_ns\n")
        for r in records:
            latency = r.latency_ns if include_latency else 0
            fh.write(f"{r.point_index},{r.score:.12g},{int(r.is_anomaly)},{latency}\n")


def scored_labels(records: Sequence, dataset: Dataset) -> Optional[np.ndarray]:
    """Labels aligned to the records, via their stream ordinals."""
    if dataset.labels is None:
        return None
    idx = np.array([r.point_index for r in records], dtype=np.intp)
    return dataset.labels[idx]


def prepare_stream(dataset: Dataset, scale_mode: str, window_size: int) -> Dataset:
    """Apply the configured scaling protocol to a stream-ready dataset.

    'full' fits the scaler on everything up front (the offline protocol);
    'bootstrap' fits it on the first window only, as a pure-streaming run
    would; 'none' passes data through.
    """
    if scale_mode == "full":
        scaled, _ = robust_scale(dataset)
        return scaled
    if scale_mode == "bootstrap":
        head = dataset.slice(0, min(window_size, dataset.n))
        from .data import apply_scaler

        _, params = robust_scale(head)
        return apply_scaler(dataset, params)
    return dataset


def _run_seed(master: int, cell: int, repeat: int) -> int:
    ss = np.random.SeedSequence([master & _MASK64, _RUN_TAG, cell, repeat])
    return int(ss.generate_state(1, np.uint64)[0])


def _cell_dir(out_dir: Path, w: int, t: int, b: int) -> Path:
    return out_dir / f"w{w}_t{t}_b{b}"


_SUMMARY_COLUMNS = (
    "window_size,num_trees,subset_size,repeats,auc_mean,auc_std,f1_mean,f1_std,"
    "precision_mean,recall_mean,mean_latency_ns,p99_latency_ns,mean_rebuild_ns,status"
)


def run_experiment(spec: ExperimentSpec) -> Path:
    """Run the full sweep; returns the path of the summary CSV.

    A failing cell is recorded in its summary row and does not abort the
    sweep. Within a cell, repeat r uses subset-selection and engine seeds
    derived from (master seed, cell index, r).
    """
    out_dir = Path(spec.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    dataset = load_csv(spec.input, spec.label_column)
    if spec.scale_mode == "full":
        dataset, _ = robust_scale(dataset)

    summary_rows: List[str] = []
    cells = list(product(spec.window_sizes, spec.tree_counts, spec.subset_sizes))
    for cell_index, (w, t, b) in enumerate(cells):
        cell_dir = _cell_dir(out_dir, w, t, b)
        cell_dir.mkdir(parents=True, exist_ok=True)
        try:
            reports: List[MetricsReport] = []
            for r in range(spec.repeats):
                rng = np.random.default_rng(
                    [spec.seed & _MASK64, SUBSET_TAG, cell_index, r]
                )
                subset = select_subset(dataset, b, rng)
                if spec.scale_mode == "bootstrap":
                    subset = prepare_stream(subset, "bootstrap", w)
                config = EngineConfig(
                    window_size=w,
                    num_trees=t,
                    threshold=spec.threshold,
                    seed=_run_seed(spec.seed, cell_index, r),
                    score_initial_window=spec.score_initial_window,
                    sampling_enabled=spec.sampling,
                    width=spec.width,
                    granularity=spec.granularity,
                )
                records, engine = run_stream(
                    subset.points, config, return_engine=True
                )
                report = build_report(
                    records,
                    scored_labels(records, subset),
                    spec.threshold,
                    engine.rebuild_ns,
                )
                write_scores_csv(
                    cell_dir / f"rep{r:03d}_scores.csv",
                    records,
                    spec.record_latency,
                )
                (cell_dir / f"rep{r:03d}_metrics.txt").write_text(report.to_text())
                reports.append(report)
            agg = aggregate_runs(reports)
            (cell_dir / "aggregate.txt").write_text(agg.to_text())
            summary_rows.append(
                f"{w},{t},{b},{spec.repeats},"
                f"{agg.mean['auc']:.12g},{agg.std['auc']:.12g},"
                f"{agg.mean['f1']:.12g},{agg.std['f1']:.12g},"
                f"{agg.mean['precision']:.12g},{agg.mean['recall']:.12g},"
                f"{agg.mean['mean_latency_ns']:.12g},"
                f"{agg.mean['p99_latency_ns']:.12g},"
                f"{agg.mean['mean_rebuild_ns']:.12g},ok"
            )
        except Exception as exc:  # cell isolation: record and move on
            (cell_dir / "error.txt").write_text(traceback.format_exc())
            summary_rows.append(
                f"{w},{t},{b},{spec.repeats},nan,nan,nan,nan,nan,nan,nan,nan,nan,"
                f"error: {type(exc).__name__}: {exc}"
            )
    summary_path = out_dir / "summary.csv"
    summary_path.write_text(
        _SUMMARY_COLUMNS + "\n" + "\n".join(summary_rows) + "\n"
    )
    return summary_path
