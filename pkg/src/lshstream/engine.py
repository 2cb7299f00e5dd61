"""Sliding-window detection loop.

The first full window bootstraps the model; every arriving point is scored
against the current forest, then buffered; when the buffer reaches the
window size the forest is rebuilt from exactly those points and the buffer
is cleared. Blocks never overlap, so a point is only ever scored by a model
built from strictly earlier blocks.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Iterable, List, Optional, Tuple

import numpy as np

from .forest import Forest, build_forest
from .lsh import _MASK64, EPOCH_TAG
from .scoring import ScoreParams, ScoreRecord, anomaly_score

__all__ = [
    "EngineConfig",
    "StreamEngine",
    "PointRejectedError",
    "InsufficientDataError",
    "bootstrap",
    "run_stream",
]


class PointRejectedError(ValueError):
    """Arriving point was skipped (bad dimensionality or non-finite values)."""


class InsufficientDataError(ValueError):
    """Stream ended before one full window of valid points arrived."""


@dataclass(frozen=True)
class EngineConfig:
    window_size: int = 128
    num_trees: int = 60
    threshold: float = 0.65
    seed: int = 1
    score_initial_window: bool = False
    sampling_enabled: bool = True
    width: float = 1.0
    granularity: float = 1.0
    branching_factor: int = 2
    backend: Optional[str] = None

    def __post_init__(self):
        if self.window_size < 2:
            raise ValueError(f"window_size must be >= 2, got {self.window_size}")
        if self.num_trees < 1:
            raise ValueError(f"num_trees must be >= 1, got {self.num_trees}")
        if not 0.0 < self.threshold < 1.0:
            raise ValueError(f"threshold must lie in (0, 1), got {self.threshold}")

    def score_params(self) -> ScoreParams:
        return ScoreParams(
            branching_factor=self.branching_factor,
            granularity=self.granularity,
            threshold=self.threshold,
        )


def _epoch_seed(seed: int, epoch: int) -> int:
    """Forest seed for a rebuild epoch; epoch 0 is the bootstrap model."""
    if epoch == 0:
        return seed
    ss = np.random.SeedSequence([seed & _MASK64, EPOCH_TAG, epoch])
    return int(ss.generate_state(1, np.uint64)[0])


class StreamEngine:
    """Single-consumer engine state; process_point calls must be ordered."""

    def __init__(self, first_window, config: EngineConfig):
        first = np.asarray(first_window, dtype=np.float64)
        if first.ndim != 2 or first.shape[0] != config.window_size:
            raise ValueError(
                f"bootstrap block must hold exactly window_size="
                f"{config.window_size} points, got shape {first.shape}"
            )
        if not np.all(np.isfinite(first)):
            raise ValueError("bootstrap block has non-finite values")
        self.config = config
        self.params = config.score_params()
        self.dimensionality = first.shape[1]
        self.model: Forest = build_forest(
            first,
            config.num_trees,
            _epoch_seed(config.seed, 0),
            sampling=config.sampling_enabled,
            width=config.width,
        )
        self._buffer = np.empty_like(first)
        self._fill = 0
        self.rebuild_epoch = 0
        self.points_seen = config.window_size
        self.rejected_count = 0
        self.rebuild_ns: List[int] = []

    @property
    def window_fill(self) -> int:
        return self._fill

    def _validate(self, x) -> np.ndarray:
        arr = np.asarray(x, dtype=np.float64)
        if arr.shape != (self.dimensionality,):
            raise PointRejectedError(
                f"point has shape {arr.shape}, expected ({self.dimensionality},)"
            )
        if not np.all(np.isfinite(arr)):
            raise PointRejectedError("point has non-finite coordinates")
        return arr

    def process_point(self, x) -> ScoreRecord:
        """Score one arriving point, then apply the window-update protocol.

        The point is scored by the current model first; the rebuild (if its
        arrival fills the window) happens after, so a window's last point is
        never scored by the model built from its own block. Invalid points
        raise PointRejectedError, are counted, and leave the window alone.
        """
        started = time.perf_counter_ns()
        ordinal = self.points_seen
        self.points_seen += 1
        try:
            arr = self._validate(x)
        except PointRejectedError:
            self.rejected_count += 1
            raise
        score = anomaly_score(arr, self.model, self.params, self.config.backend)
        latency = time.perf_counter_ns() - started
        record = ScoreRecord(
            point_index=ordinal,
            score=score,
            is_anomaly=score > self.config.threshold,
            latency_ns=latency,
        )
        self._buffer[self._fill] = arr
        self._fill += 1
        if self._fill == self.config.window_size:
            self._rebuild()
        return record

    def _rebuild(self) -> None:
        started = time.perf_counter_ns()
        block = self._buffer.copy()
        self.rebuild_epoch += 1
        self.model = build_forest(
            block,
            self.config.num_trees,
            _epoch_seed(self.config.seed, self.rebuild_epoch),
            sampling=self.config.sampling_enabled,
            width=self.config.width,
        )
        self._fill = 0
        self.rebuild_ns.append(time.perf_counter_ns() - started)

    def score_retrospective(self, x, point_index: int) -> ScoreRecord:
        """Score a point against the current model without ingesting it."""
        started = time.perf_counter_ns()
        arr = self._validate(x)
        score = anomaly_score(arr, self.model, self.params, self.config.backend)
        latency = time.perf_counter_ns() - started
        return ScoreRecord(
            point_index=point_index,
            score=score,
            is_anomaly=score > self.config.threshold,
            latency_ns=latency,
        )


def bootstrap(first_window, config: EngineConfig) -> StreamEngine:
    """Build the initial model from exactly one window of points."""
    return StreamEngine(first_window, config)


def run_stream(
    source: Iterable,
    config: EngineConfig,
    *,
    return_engine: bool = False,
):
    """Consume an ordered point source and score everything after bootstrap.

    The first window_size valid points build the initial model (scored
    retrospectively when config.score_initial_window is set); every later
    point flows through process_point. Invalid points are counted and
    skipped. Output order is arrival order.
    """
    w = config.window_size
    pending: List[Tuple[int, np.ndarray]] = []
    pre_rejects = 0
    engine: Optional[StreamEngine] = None
    records: List[ScoreRecord] = []
    m: Optional[int] = None
    ordinal = -1
    for ordinal, x in enumerate(source):
        if engine is None:
            arr = np.asarray(x, dtype=np.float64)
            if m is None and arr.ndim == 1 and arr.size > 0:
                m = arr.shape[0]
            if arr.shape != (m,) or not np.all(np.isfinite(arr)):
                pre_rejects += 1
                continue
            pending.append((ordinal, arr))
            if len(pending) == w:
                engine = bootstrap(np.array([p for _, p in pending]), config)
                engine.points_seen = ordinal + 1
                engine.rejected_count = pre_rejects
                if config.score_initial_window:
                    for idx, point in pending:
                        records.append(engine.score_retrospective(point, idx))
        else:
            try:
                records.append(engine.process_point(x))
            except PointRejectedError:
                continue
    if engine is None:
        raise InsufficientDataError(
            f"source yielded {len(pending)} valid points; "
            f"window_size={w} are required for bootstrap"
        )
    if return_engine:
        return records, engine
    return records
