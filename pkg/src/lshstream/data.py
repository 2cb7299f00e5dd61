"""Dataset ingestion and preparation for the stream harness.

Covers headered-CSV loading with strict numeric validation, the robust
scaler ((x - median) / IQR per column), contiguous-block subset selection
(streams are ordered, so a shuffled subset would be meaningless), and a
synthetic Gaussian-cluster generator with box outliers and an optional
mid-stream drift.
"""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .lsh import _MASK64

__all__ = [
    "Dataset",
    "CsvParseError",
    "ScalerParams",
    "SynthSpec",
    "load_csv",
    "write_csv",
    "robust_scale",
    "apply_scaler",
    "select_subset",
    "synth_stream",
]


class CsvParseError(ValueError):
    """Input CSV violates the expected shape; message carries the file line."""


@dataclass
class Dataset:
    """Ordered rows of an m-dimensional stream plus optional 0/1 labels."""

    points: np.ndarray
    labels: Optional[np.ndarray] = None
    column_names: List[str] = field(default_factory=list)

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=np.float64)
        if self.points.ndim != 2:
            raise ValueError("points must be a (n, m) array")
        if self.labels is not None:
            self.labels = np.asarray(self.labels, dtype=bool)
            if self.labels.shape != (self.points.shape[0],):
                raise ValueError(
                    f"{self.labels.shape[0]} labels for {self.points.shape[0]} rows"
                )
        if not self.column_names:
            self.column_names = [f"x{i}" for i in range(self.points.shape[1])]
        if len(self.column_names) != self.points.shape[1]:
            raise ValueError("one column name per dimension required")

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def m(self) -> int:
        return self.points.shape[1]

    def slice(self, start: int, stop: int) -> "Dataset":
        labels = None if self.labels is None else self.labels[start:stop]
        return Dataset(self.points[start:stop], labels, list(self.column_names))


def load_csv(path, label_column: Optional[str] = None) -> Dataset:
    """Load a headered CSV of finite numerics, optionally holding 0/1 labels.

    Row order is preserved. Malformed content (ragged rows, non-numeric or
    non-finite cells, labels outside {0, 1}, unknown label column) raises
    CsvParseError naming the offending file line.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CsvParseError(f"{path}: empty file, expected a header row")
        header = [name.strip() for name in header]
        label_idx = None
        if label_column is not None:
            if label_column not in header:
                raise CsvParseError(
                    f"{path}: label column {label_column!r} not in header {header}"
                )
            label_idx = header.index(label_column)
        names = [name for i, name in enumerate(header) if i != label_idx]
        rows: List[List[float]] = []
        labels: List[bool] = []
        for line_no, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise CsvParseError(
                    f"{path}:{line_no}: expected {len(header)} cells, got {len(row)}"
                )
            values = []
            for i, cell in enumerate(row):
                try:
                    value = float(cell)
                except ValueError:
                    raise CsvParseError(
                        f"{path}:{line_no}: non-numeric cell {cell!r} in column "
                        f"{header[i]!r}"
                    ) from None
                if not np.isfinite(value):
                    raise CsvParseError(
                        f"{path}:{line_no}: non-finite value in column {header[i]!r}"
                    )
                if i == label_idx:
                    if value not in (0.0, 1.0):
                        raise CsvParseError(
                            f"{path}:{line_no}: label must be 0 or 1, got {cell!r}"
                        )
                    labels.append(bool(value))
                else:
                    values.append(value)
            rows.append(values)
    points = np.array(rows, dtype=np.float64) if rows else np.zeros((0, len(names)))
    return Dataset(
        points=points,
        labels=np.array(labels, dtype=bool) if label_idx is not None else None,
        column_names=names,
    )


def write_csv(dataset: Dataset, path, label_column: str = "label") -> None:
    """Inverse of load_csv; floats use repr so a round-trip is exact."""
    header = list(dataset.column_names)
    if dataset.labels is not None:
        header.append(label_column)
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for i in range(dataset.n):
            cells = [repr(float(v)) for v in dataset.points[i]]
            if dataset.labels is not None:
                cells.append(str(int(dataset.labels[i])))
            fh.write(",".join(cells) + "\n")


@dataclass
class ScalerParams:
    """Fitted per-column medians and interquartile ranges."""

    median: np.ndarray
    iqr: np.ndarray
    column_names: List[str] = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(
            {
                "median": list(map(float, self.median)),
                "iqr": list(map(float, self.iqr)),
                "column_names": self.column_names,
            },
            indent=2,
        )

    @classmethod
    def from_json(cls, text: str) -> "ScalerParams":
        raw = json.loads(text)
        return cls(
            median=np.asarray(raw["median"], dtype=np.float64),
            iqr=np.asarray(raw["iqr"], dtype=np.float64),
            column_names=list(raw.get("column_names", [])),
        )


def robust_scale(dataset: Dataset) -> tuple:
    """Scale each column to (x - median) / IQR, fitted on the full input.

    Quantiles use linear interpolation between order statistics. Columns
    with zero IQR carry no spread information and are mapped to zero, with a
    warning.
    """
    if dataset.n == 0:
        raise ValueError("cannot fit a scaler on an empty dataset")
    q25, median, q75 = np.percentile(dataset.points, [25.0, 50.0, 75.0], axis=0)
    iqr = q75 - q25
    params = ScalerParams(median=median, iqr=iqr, column_names=list(dataset.column_names))
    return apply_scaler(dataset, params), params


def apply_scaler(dataset: Dataset, params: ScalerParams) -> Dataset:
    if params.median.shape[0] != dataset.m:
        raise ValueError(
            f"scaler fitted on m={params.median.shape[0]}, dataset has m={dataset.m}"
        )
    degenerate = params.iqr == 0.0
    if np.any(degenerate):
        bad = [dataset.column_names[i] for i in np.flatnonzero(degenerate)]
        warnings.warn(
            f"zero interquartile range in column(s) {bad}; scaling them to 0",
            stacklevel=2,
        )
    safe_iqr = np.where(degenerate, 1.0, params.iqr)
    scaled = (dataset.points - params.median) / safe_iqr
    scaled[:, degenerate] = 0.0
    return Dataset(scaled, dataset.labels, list(dataset.column_names))


def select_subset(dataset: Dataset, b: int, rng: np.random.Generator) -> Dataset:
    """Uniformly random contiguous block of b rows, order preserved."""
    if b < 1:
        raise ValueError(f"subset size must be >= 1, got {b}")
    if b > dataset.n:
        raise ValueError(f"subset size {b} exceeds dataset size {dataset.n}")
    start = int(rng.integers(0, dataset.n - b + 1))
    return dataset.slice(start, start + b)


@dataclass
class SynthSpec:
    """Parameters of the synthetic stream generator.

    Inliers are drawn from an isotropic Gaussian cluster (label 0), outliers
    uniformly from a box (label 1). When drift_at is set, the cluster mean
    shifts by drift_shift in every dimension from that ordinal on.
    """

    n: int
    dims: int = 6
    outlier_rate: float = 0.02
    drift_at: Optional[int] = None
    inlier_mean: float = 0.0
    inlier_std: float = 1.0
    drift_shift: float = 4.0
    outlier_low: float = -10.0
    outlier_high: float = 10.0
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if not 0.0 <= self.outlier_rate < 0.5:
            raise ValueError(
                f"outlier_rate must lie in [0, 0.5), got {self.outlier_rate}"
            )


def synth_stream(spec: SynthSpec) -> Dataset:
    """Generate a labeled synthetic stream per the spec (deterministic in seed)."""
    rng = np.random.default_rng([spec.seed & _MASK64, 0])
    labels = rng.random(spec.n) < spec.outlier_rate
    means = np.full((spec.n, spec.dims), float(spec.inlier_mean))
    if spec.drift_at is not None:
        means[spec.drift_at :, :] += spec.drift_shift
    inliers = rng.normal(means, spec.inlier_std)
    outliers = rng.uniform(spec.outlier_low, spec.outlier_high, (spec.n, spec.dims))
    points = np.where(labels[:, None], outliers, inliers)
    return Dataset(points=points, labels=labels)
