"""Evaluation metrics over labeled score records.

AUC is computed as the Mann-Whitney statistic via one sort with midranks for
ties, which equals the trapezoidal area under the ROC curve. F1 follows the
usual precision/recall harmonic mean with zero-denominator cases reported as
0 and flagged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import Dict, List, NamedTuple, Optional, Sequence

import numpy as np

__all__ = [
    "LabeledScore",
    "UndefinedMetricError",
    "F1Result",
    "MetricsReport",
    "RunAggregate",
    "auc",
    "f1",
    "build_report",
    "aggregate_runs",
]


class UndefinedMetricError(ValueError):
    """Metric has no value for this input (e.g. single-class AUC)."""


class LabeledScore(NamedTuple):
    score: float
    label: bool


class F1Result(NamedTuple):
    precision: float
    recall: float
    f1: float
    degenerate: bool


def auc(scores, labels) -> float:
    """P(random positive outscores random negative), ties counted half.

    O(n log n): single sort, midranks for tied scores. Raises
    UndefinedMetricError unless both classes are present.
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=bool)
    if scores.shape != labels.shape or scores.ndim != 1:
        raise ValueError("scores and labels must be 1-d and the same length")
    n = scores.shape[0]
    n_pos = int(labels.sum())
    n_neg = n - n_pos
    if n_pos == 0 or n_neg == 0:
        raise UndefinedMetricError(
            f"AUC needs both classes; got {n_pos} positives, {n_neg} negatives"
        )
    order = np.argsort(scores, kind="mergesort")
    s = scores[order]
    boundary = np.empty(n, dtype=bool)
    boundary[0] = True
    boundary[1:] = s[1:] != s[:-1]
    start = np.flatnonzero(boundary)
    end = np.append(start[1:], n)
    midrank = (start + end - 1) / 2.0 + 1.0  # 1-based average rank per tie group
    ranks = np.empty(n, dtype=np.float64)
    ranks[order] = np.repeat(midrank, end - start)
    u = ranks[labels].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def f1(scores, labels, threshold: float) -> F1Result:
    """Precision, recall and F1 for the rule `score > threshold`.

    Zero-denominator cases (no predicted positives, no true positives, or
    precision + recall = 0) yield 0 for the affected values and set the
    degenerate flag rather than raising.
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=bool)
    predicted = scores > threshold
    tp = int(np.count_nonzero(predicted & labels))
    fp = int(np.count_nonzero(predicted & ~labels))
    fn = int(np.count_nonzero(~predicted & labels))
    degenerate = False
    if tp + fp == 0:
        precision = 0.0
        degenerate = True
    else:
        precision = tp / (tp + fp)
    if tp + fn == 0:
        recall = 0.0
        degenerate = True
    else:
        recall = tp / (tp + fn)
    if precision + recall == 0.0:
        return F1Result(precision, recall, 0.0, True)
    return F1Result(
        precision, recall, 2.0 * precision * recall / (precision + recall), degenerate
    )


def _fmt(value) -> str:
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        return repr(value)  # shortest exact form, so text round-trips
    return str(value)


@dataclass
class MetricsReport:
    """Flat summary of one detection run; serializes to key=value text."""

    n_points: int
    n_anomalies: int
    threshold: float
    auc: float
    precision: float
    recall: float
    f1: float
    f1_degenerate: bool
    mean_latency_ns: float
    p99_latency_ns: float
    n_rebuilds: int = 0
    mean_rebuild_ns: float = float("nan")

    def to_text(self) -> str:
        lines = [
            f"{field.name}={_fmt(getattr(self, field.name))}"
            for field in fields(self)
        ]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "MetricsReport":
        raw: Dict[str, str] = {}
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, value = line.partition("=")
            raw[key.strip()] = value.strip()
        kwargs = {}
        for field in fields(cls):
            value = raw[field.name]
            if field.name in ("n_points", "n_anomalies", "n_rebuilds"):
                kwargs[field.name] = int(value)
            elif field.name == "f1_degenerate":
                kwargs[field.name] = value not in ("0", "false", "False")
            else:
                kwargs[field.name] = float(value)
        return cls(**kwargs)


_AGGREGATE_FIELDS = (
    "n_points",
    "n_anomalies",
    "auc",
    "precision",
    "recall",
    "f1",
    "mean_latency_ns",
    "p99_latency_ns",
    "n_rebuilds",
    "mean_rebuild_ns",
)


@dataclass
class RunAggregate:
    """Per-field mean and population standard deviation over repeated runs."""

    n_runs: int
    threshold: float
    mean: Dict[str, float]
    std: Dict[str, float]

    def to_text(self) -> str:
        lines = [f"n_runs={self.n_runs}", f"threshold={_fmt(self.threshold)}"]
        for name in _AGGREGATE_FIELDS:
            lines.append(f"{name}_mean={_fmt(self.mean[name])}")
            lines.append(f"{name}_std={_fmt(self.std[name])}")
        return "\n".join(lines) + "\n"


def build_report(
    records: Sequence,
    labels: Optional[Sequence] = None,
    threshold: float = 0.65,
    rebuild_ns: Optional[Sequence[int]] = None,
) -> MetricsReport:
    """Assemble a MetricsReport from score records and optional labels.

    AUC/precision/recall/F1 are NaN/0 with the degenerate flag when labels
    are absent; a single-class label vector leaves AUC as NaN rather than
    failing the whole report.
    """
    scores = np.array([r.score for r in records], dtype=np.float64)
    latencies = np.array([r.latency_ns for r in records], dtype=np.float64)
    n_anomalies = sum(1 for r in records if r.is_anomaly)
    auc_value = float("nan")
    precision = recall = f1_value = float("nan")
    degenerate = True
    if labels is not None:
        labels = np.asarray(labels, dtype=bool)
        if labels.shape != scores.shape:
            raise ValueError(
                f"got {labels.shape[0]} labels for {scores.shape[0]} records"
            )
        try:
            auc_value = auc(scores, labels)
        except UndefinedMetricError:
            pass
        precision, recall, f1_value, degenerate = f1(scores, labels, threshold)
    if latencies.size:
        mean_latency = float(latencies.mean())
        p99_latency = float(np.percentile(latencies, 99))
    else:
        mean_latency = p99_latency = float("nan")
    rebuilds = list(rebuild_ns) if rebuild_ns else []
    return MetricsReport(
        n_points=len(records),
        n_anomalies=n_anomalies,
        threshold=threshold,
        auc=auc_value,
        precision=precision,
        recall=recall,
        f1=f1_value,
        f1_degenerate=degenerate,
        mean_latency_ns=mean_latency,
        p99_latency_ns=p99_latency,
        n_rebuilds=len(rebuilds),
        mean_rebuild_ns=float(np.mean(rebuilds)) if rebuilds else float("nan"),
    )


def aggregate_runs(reports: Sequence[MetricsReport]) -> RunAggregate:
    """Arithmetic mean and population std per numeric field.

    A single report aggregates to itself with zero dispersion. NaNs (e.g.
    undefined AUC) propagate into the aggregate rather than being dropped.
    """
    if not reports:
        raise ValueError("need at least one report to aggregate")
    mean: Dict[str, float] = {}
    std: Dict[str, float] = {}
    for name in _AGGREGATE_FIELDS:
        values = np.array([getattr(r, name) for r in reports], dtype=np.float64)
        mean[name] = float(values.mean())
        std[name] = float(values.std(ddof=0))
    return RunAggregate(
        n_runs=len(reports),
        threshold=reports[0].threshold,
        mean=mean,
        std=std,
    )
