"""Path lengths, the expected-depth normalizer, and the ensemble score.

A query descends each tree by re-hashing with the function recorded at
every internal node. The depth where it stops, adjusted for compressed
single-branch runs via e = hash_index / depth, is its path length h. Tree
contributions 2**(-h / mu(psi)) average to a score in (0, 1]: short paths
mean easy isolation, i.e. anomalous.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

__all__ = [
    "EULER_GAMMA",
    "ScoreParams",
    "ScoreRecord",
    "DegenerateForestError",
    "mu",
    "path_length",
    "anomaly_score",
    "classify",
]

EULER_GAMMA = 0.5772156649


class DegenerateForestError(RuntimeError):
    """No tree in the forest produced a usable path length."""


@dataclass(frozen=True)
class ScoreParams:
    """Knobs of the scoring side.

    branching_factor is the v used inside mu; splits produce varying bucket
    counts, but the height-limit bound is derived for equiprobable buckets,
    so v = 2 is used consistently unless overridden. normalizer_psi forces a
    single mu(normalizer_psi) for every tree instead of per-tree mu(psi_i)
    (the whole-window normalization variant).
    """

    branching_factor: int = 2
    granularity: float = 1.0
    threshold: float = 0.65
    normalizer_psi: Optional[int] = None

    def __post_init__(self):
        if self.branching_factor < 2:
            raise ValueError(
                f"branching_factor must be >= 2, got {self.branching_factor}"
            )
        if not 0.0 < self.threshold < 1.0:
            raise ValueError(f"threshold must lie in (0, 1), got {self.threshold}")


DEFAULT_PARAMS = ScoreParams()


@dataclass(frozen=True)
class ScoreRecord:
    """Outcome of scoring one streamed point."""

    point_index: int
    score: float
    is_anomaly: bool
    latency_ns: int


def mu(psi: int, v: int = 2) -> float:
    """Expected path length of a random query in a trie over psi points.

    Piecewise: 0 for psi <= 1, 1 for 1 < psi <= v, and
    (ln(psi) + ln(v - 1) + gamma) / ln(v) - 1/2 above that, with gamma the
    Euler constant. Normalizing by mu makes path lengths comparable across
    trees grown from different sample sizes.
    """
    if v < 2:
        raise ValueError(f"branching factor must be >= 2, got {v}")
    if psi <= 1:
        return 0.0
    if psi <= v:
        return 1.0
    return (math.log(psi) + math.log(v - 1) + EULER_GAMMA) / math.log(v) - 0.5


def _as_point(x, m: int) -> np.ndarray:
    arr = np.ascontiguousarray(x, dtype=np.float64)
    if arr.ndim != 1 or arr.shape[0] != m:
        raise ValueError(f"point has shape {arr.shape}, expected ({m},)")
    if not np.all(np.isfinite(arr)):
        raise ValueError("point has non-finite coordinates")
    return arr


def path_length(x, tree, params: Optional[ScoreParams] = None, backend=None) -> float:
    """Compression-adjusted depth of x in one tree; -1 for an empty tree.

    At a leaf reached at depth d the result is d * e**g + mu(leaf.size) with
    e = leaf.hash_index / d (a leaf at the root returns mu(root.size)); when
    the query's key is missing at an internal node it is (d+1) * e**g with
    e = (node.hash_index + 1) / (d + 1).
    """
    from .backend import kernel_for

    params = params if params is not None else DEFAULT_PARAMS
    flat = tree.flat_view()
    arr = _as_point(x, flat.dimensionality)
    kernel = kernel_for(flat, backend)
    return float(
        kernel.path_lengths(arr, params.granularity, params.branching_factor)[0]
    )


def anomaly_score(
    x, forest, params: Optional[ScoreParams] = None, backend=None
) -> float:
    """Ensemble anomaly score of x, in (0, 1].

    Averages 2**(-h_i / mu(psi_i)) over the forest. Degenerate trees
    (psi <= 1, where mu is 0) contribute 1 exactly when their path length is
    0 and are otherwise dropped, with the average renormalized over the
    trees that contributed; empty trees (h = -1) are always dropped.
    """
    from .backend import kernel_for

    params = params if params is not None else DEFAULT_PARAMS
    flat = forest.flat
    arr = _as_point(x, flat.dimensionality)
    kernel = kernel_for(flat, backend)
    h = kernel.path_lengths(arr, params.granularity, params.branching_factor)
    if params.normalizer_psi is not None:
        mus = np.full(
            flat.n_trees, mu(params.normalizer_psi, params.branching_factor)
        )
    else:
        mus = flat.mu_values(params.branching_factor)
    usable = (mus > 0.0) & (h >= 0.0)
    total = float(np.sum(np.exp2(-h[usable] / mus[usable])))
    count = int(np.count_nonzero(usable))
    pinned = int(np.count_nonzero((mus == 0.0) & (h == 0.0)))
    total += pinned
    count += pinned
    if count == 0:
        raise DegenerateForestError("every tree in the forest is degenerate")
    return total / count


def classify(score: float, params: Optional[ScoreParams] = None) -> bool:
    """True iff the score strictly exceeds the decision threshold."""
    params = params if params is not None else DEFAULT_PARAMS
    return score > params.threshold
