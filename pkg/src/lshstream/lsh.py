"""l2 (p-stable) locality-sensitive hashing.

A hash function is h(x) = floor((a . x + b) / width) with the projection a
drawn coordinate-wise from N(0, 1) and the offset b uniform on [0, width).
Nearby points collide with higher probability than distant ones, which is
what lets recursive hashing isolate outliers quickly.
"""

from __future__ import annotations

import math
from typing import Dict, List, Optional

import numpy as np

__all__ = ["L2HashFunction", "HashFamily", "make_family", "hash_point", "lsh_split"]

_MASK64 = 0xFFFFFFFFFFFFFFFF

# Tags keep the per-purpose RNG streams disjoint (function derivation,
# per-tree sampling, rebuild epochs, subset selection).
FUNC_TAG = 1
SAMPLE_TAG = 2
EPOCH_TAG = 3
SUBSET_TAG = 4


def _rng_for(seed: int, tag: int, index: int) -> np.random.Generator:
    return np.random.default_rng([seed & _MASK64, tag, index])


class L2HashFunction:
    """One p-stable random-projection hash function.

    Immutable after construction; evaluating the same point always yields the
    same key.
    """

    __slots__ = ("projection", "offset", "width")

    def __init__(self, projection: np.ndarray, offset: float, width: float):
        if width <= 0.0:
            raise ValueError(f"width must be positive, got {width}")
        if not 0.0 <= offset < width:
            raise ValueError(f"offset must lie in [0, width), got {offset}")
        self.projection = np.asarray(projection, dtype=np.float64)
        self.projection.flags.writeable = False
        self.offset = float(offset)
        self.width = float(width)

    @property
    def dimensionality(self) -> int:
        return self.projection.shape[0]

    def __call__(self, x) -> int:
        return hash_point(self, x)

    def keys(self, points: np.ndarray) -> np.ndarray:
        """Vectorized bucket keys for a (n, m) block of points."""
        points = np.asarray(points, dtype=np.float64)
        if points.shape[-1] != self.dimensionality:
            raise ValueError(
                f"dimension mismatch: function has m={self.dimensionality}, "
                f"points have m={points.shape[-1]}"
            )
        raw = (points @ self.projection + self.offset) / self.width
        return np.floor(raw).astype(np.int64)

    def __repr__(self) -> str:
        return f"L2HashFunction(m={self.dimensionality}, width={self.width})"


class HashFamily:
    """Ordered family of hash functions, derived lazily from the seed.

    Functions are materialized in index order from one generator seeded by
    (seed,), so the function at index I is a pure function of
    (seed, I, m, width) and two families built from the same seed are
    interchangeable, regardless of access order. Materializing a new high
    index is not thread-safe; reading already-derived functions is.
    """

    def __init__(self, dimensionality: int, seed: int, width: float = 1.0):
        if dimensionality < 1:
            raise ValueError(f"dimensionality must be >= 1, got {dimensionality}")
        if width <= 0.0:
            raise ValueError(f"width must be positive, got {width}")
        self.dimensionality = int(dimensionality)
        self.seed = int(seed)
        self.width = float(width)
        self._cache: List[L2HashFunction] = []
        self._rng: Optional[np.random.Generator] = None

    def function(self, index: int) -> L2HashFunction:
        """Return the hash function at a non-negative index."""
        if index < 0:
            raise ValueError(f"function index must be >= 0, got {index}")
        cache = self._cache
        if index < len(cache):
            return cache[index]
        if self._rng is None:
            self._rng = _rng_for(self.seed, FUNC_TAG, 0)
        while len(cache) <= index:
            projection = self._rng.standard_normal(self.dimensionality)
            offset = self._rng.uniform(0.0, self.width)
            cache.append(L2HashFunction(projection, offset, self.width))
        return cache[index]

    __getitem__ = function

    def __repr__(self) -> str:
        return (
            f"HashFamily(m={self.dimensionality}, seed={self.seed}, "
            f"width={self.width})"
        )


def make_family(dimensionality: int, seed: int, width: float = 1.0) -> HashFamily:
    """Create an l2 hash family for m-dimensional data.

    Parameters
    ----------
    dimensionality : int
        Data dimensionality m (>= 1).
    seed : int
        Any integer; together with a function index it fully determines that
        function.
    width : float
        Bucket width. The default of 1.0 assumes robust-scaled inputs, where
        typical coordinate spread is near one.
    """
    return HashFamily(dimensionality, seed, width)


def hash_point(f: L2HashFunction, x) -> int:
    """Hash one point to its integer bucket key.

    The dot product runs over all coordinates jointly, so correlation across
    input streams enters through the projection. The accumulation order is a
    plain left-to-right sum; the compiled and pure-Python tree-traversal
    kernels use the identical order so keys agree bit-for-bit.
    """
    x = np.asarray(x, dtype=np.float64)
    proj = f.projection
    if x.shape != proj.shape:
        raise ValueError(
            f"dimension mismatch: function has m={proj.shape[0]}, point has "
            f"shape {x.shape}"
        )
    acc = 0.0
    for j in range(proj.shape[0]):
        acc += proj[j] * x[j]
    return int(math.floor((acc + f.offset) / f.width))


def lsh_split(points, f: L2HashFunction) -> Dict[int, np.ndarray]:
    """Partition a block of points by hash key.

    Returns a dict mapping each occurring key to the sub-block of points that
    hash to it. The sub-blocks are pairwise disjoint and their sizes sum to
    the input size. An empty input yields an empty dict.
    """
    points = np.asarray(points, dtype=np.float64)
    if points.size == 0:
        return {}
    keys = f.keys(points)
    out: Dict[int, np.ndarray] = {}
    for key in np.unique(keys):
        out[int(key)] = points[keys == key]
    return out
