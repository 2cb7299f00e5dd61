"""LSH isolation trees and the ensemble built from a window of points.

Each tree recursively partitions a subsample by successive hash functions
until every point sits alone or the height limit fires. Runs of degenerate
splits (a single occupied bucket) are compressed by advancing the function
index without emitting a node, so the trie stays compact and the recorded
``hash_index`` can jump ahead of the depth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from .lsh import SAMPLE_TAG, HashFamily, _rng_for, make_family

__all__ = [
    "TreeNode",
    "LSHiTree",
    "Forest",
    "height_limit",
    "sample_window",
    "build_tree",
    "build_forest",
]


@dataclass
class TreeNode:
    """Trie node: ``children`` empty means leaf.

    ``size`` counts the sample points that reached the node. ``hash_index``
    is the function index used for the split (internal nodes) or the index at
    which construction stopped (leaves).
    """

    size: int
    hash_index: int
    children: Dict[int, "TreeNode"] = field(default_factory=dict)

    @property
    def is_leaf(self) -> bool:
        return not self.children


@dataclass
class LSHiTree:
    """One tree plus the family and limits it was built with.

    func_projections/func_offsets, when present, materialize the family's
    functions from index 0 (row i = function i); builders fill them in so
    flattening for the scoring kernels need not re-derive functions.
    """

    root: Optional[TreeNode]
    family: HashFamily
    height_limit: int
    sample_size: int
    func_projections: Optional[np.ndarray] = field(default=None, repr=False)
    func_offsets: Optional[np.ndarray] = field(default=None, repr=False)
    _flat: Optional[object] = field(default=None, repr=False, compare=False)

    def flat_view(self):
        """Single-tree flat array view for the scoring kernels (cached)."""
        if self._flat is None:
            from ._flat import FlatForest

            self._flat = FlatForest.from_trees([self])
        return self._flat

    def path_length(self, x, params=None) -> float:
        from .scoring import path_length

        return path_length(x, self, params)


class Forest:
    """Immutable ensemble of LSH isolation trees."""

    def __init__(self, trees: List[LSHiTree], build_seed: int):
        self.trees = list(trees)
        self.build_seed = int(build_seed)
        self._flat = None

    @property
    def t(self) -> int:
        return len(self.trees)

    @property
    def dimensionality(self) -> int:
        return self.trees[0].family.dimensionality

    @property
    def flat(self):
        """Flattened array view used by the scoring kernels (cached)."""
        if self._flat is None:
            from ._flat import FlatForest

            self._flat = FlatForest.from_trees(self.trees)
        return self._flat

    def __len__(self) -> int:
        return len(self.trees)

    def __repr__(self) -> str:
        return f"Forest(t={self.t}, build_seed={self.build_seed})"


def height_limit(sample_size: int) -> int:
    """Height cap for a tree grown from ``sample_size`` points.

    Uses the average-height estimate of a random digital trie,
    floor(2*log2(psi) + 0.8327), so construction stops near the depth where
    further splits stop carrying ranking information.
    """
    if sample_size < 1:
        raise ValueError(f"sample_size must be >= 1, got {sample_size}")
    return int(math.floor(2.0 * math.log2(sample_size) + 0.8327))


def sample_window(window, rng: np.random.Generator) -> np.ndarray:
    """Draw the per-tree subsample from a window of points.

    Each point is kept independently with probability min(1, 2**s / n) where
    s ~ U(6, 10), which targets subsample sizes in [64, 1024] and saturates
    to the whole window when it is small.
    """
    window = np.asarray(window, dtype=np.float64)
    n = window.shape[0]
    if n == 0:
        raise ValueError("window must be non-empty")
    s = rng.uniform(6.0, 10.0)
    rate = min(1.0, 2.0**s / n)
    mask = rng.random(n) < rate
    return window[mask]


def build_tree(
    sample,
    height_limit: int,
    start_index: int,
    family: HashFamily,
) -> Optional[TreeNode]:
    """Recursively grow one tree over ``sample``.

    Empty input gives None; a singleton or an exhausted index budget gives a
    leaf. Otherwise the sample is split by the function at the current index,
    advancing the index past degenerate (single-bucket) splits while it stays
    within the limit, then recursing per bucket with the next index. A split
    landing at or past the limit is abandoned in favor of a leaf, so only
    that final leaf may record an index beyond the limit.
    """
    if start_index < 0:
        raise ValueError(f"start index must be >= 0, got {start_index}")
    sample = np.asarray(sample, dtype=np.float64)
    if sample.ndim == 1:
        sample = sample.reshape(1, -1) if sample.size else sample.reshape(0, 0)
    if sample.size and sample.shape[1] != family.dimensionality:
        raise ValueError(
            f"dimension mismatch: family has m={family.dimensionality}, "
            f"sample has m={sample.shape[1]}"
        )
    root, _, _, _ = _build(sample, height_limit, start_index, family)
    return root


class _TreePart:
    """Flat-array emission of one tree, filled in while it is grown."""

    __slots__ = (
        "root_id",
        "size",
        "hash_index",
        "child_start",
        "child_count",
        "child_keys",
        "child_node",
        "max_internal",
    )

    def __init__(self):
        self.root_id = -1
        self.size: List[int] = []
        self.hash_index: List[int] = []
        self.child_start: List[int] = []
        self.child_count: List[int] = []
        self.child_keys: List[int] = []
        self.child_node: List[int] = []
        self.max_internal = -1

    def emit_leaf(self, size: int, hash_index: int) -> int:
        nid = len(self.size)
        self.size.append(size)
        self.hash_index.append(hash_index)
        self.child_start.append(0)
        self.child_count.append(0)
        return nid

    def emit_internal(self, size: int, hash_index: int, pairs) -> int:
        start = len(self.child_keys)
        for key, cid in pairs:
            self.child_keys.append(key)
            self.child_node.append(cid)
        nid = len(self.size)
        self.size.append(size)
        self.hash_index.append(hash_index)
        self.child_start.append(start)
        self.child_count.append(len(pairs))
        if hash_index > self.max_internal:
            self.max_internal = hash_index
        return nid


def _build(points: np.ndarray, H: int, I0: int, family: HashFamily):
    """Grow a tree; also returns the function tables and flat emission.

    Returns (root, projections, offsets, part): row j of the tables holds
    function I0 + j, and `part` carries the tree in the array layout the
    scoring kernels consume, so builders avoid a separate flattening pass.
    """
    n = points.shape[0]
    part = _TreePart()
    empty_p = np.zeros((0, family.dimensionality), dtype=np.float64)
    empty_b = np.zeros(0, dtype=np.float64)
    if n == 0:
        return None, empty_p, empty_b, part
    if n == 1 or I0 > H:
        part.root_id = part.emit_leaf(n, I0)
        return TreeNode(size=n, hash_index=I0), empty_p, empty_b, part

    # The recursion can touch function indices I0..H+1 at most (the
    # degenerate-split loop stops advancing past H). Hashing the whole sample
    # against all of them in one matmul keeps numpy out of the per-node work;
    # the recursion itself runs on plain lists of row indices.
    count = H + 2 - I0
    projections = np.empty((count, points.shape[1]), dtype=np.float64)
    offsets = np.empty(count, dtype=np.float64)
    for j in range(count):
        fn = family.function(I0 + j)
        projections[j] = fn.projection
        offsets[j] = fn.offset
    key_matrix = np.floor(
        (points @ projections.T + offsets) / family.width
    ).astype(np.int64)
    keys = key_matrix.tolist()

    def grow(rows: List[int], I: int):
        k = len(rows)
        if k == 1 or I > H:
            return TreeNode(size=k, hash_index=I), part.emit_leaf(k, I)
        col = I - I0
        buckets: Dict[int, List[int]] = {}
        for r in rows:
            buckets.setdefault(keys[r][col], []).append(r)
        while len(buckets) == 1 and I <= H:
            I += 1
            col += 1
            buckets = {}
            for r in rows:
                buckets.setdefault(keys[r][col], []).append(r)
        if I >= H:
            # Height budget exhausted (or the first usable split arrived
            # exactly at the cap): keep the whole block in one leaf.
            return TreeNode(size=k, hash_index=I), part.emit_leaf(k, I)
        children = {}
        pairs = []
        for key, sub in sorted(buckets.items()):
            node, cid = grow(sub, I + 1)
            children[key] = node
            pairs.append((key, cid))
        nid = part.emit_internal(k, I, pairs)
        return TreeNode(size=k, hash_index=I, children=children), nid

    root, root_id = grow(list(range(n)), I0)
    part.root_id = root_id
    return root, projections, offsets, part


def build_forest(
    window,
    t: int,
    seed: int,
    *,
    sampling: bool = True,
    width: float = 1.0,
) -> Forest:
    """Build the t-tree ensemble from the current window.

    Tree i gets a fresh hash family seeded with ``seed + i`` and, when
    ``sampling`` is on, its own subsample drawn via :func:`sample_window`;
    with sampling off every tree sees the whole window. The result is a pure
    function of (window order, t, seed).
    """
    window = np.asarray(window, dtype=np.float64)
    if window.ndim != 2 or window.shape[0] == 0:
        raise ValueError("window must be a non-empty (n, m) array")
    if t < 1:
        raise ValueError(f"t must be >= 1, got {t}")
    from ._flat import FlatForest

    trees: List[LSHiTree] = []
    parts = []
    tables = []
    for i in range(t):
        if sampling:
            sample = sample_window(window, _rng_for(seed, SAMPLE_TAG, i))
        else:
            sample = window
        psi = sample.shape[0]
        family = make_family(window.shape[1], seed + i, width)
        if psi == 0:
            trees.append(LSHiTree(None, family, 0, 0))
            parts.append(_TreePart())
            tables.append((None, None))
            continue
        limit = height_limit(psi)
        root, proj, offs, part = _build(sample, limit, 0, family)
        trees.append(
            LSHiTree(
                root,
                family,
                limit,
                psi,
                func_projections=proj,
                func_offsets=offs,
            )
        )
        parts.append(part)
        tables.append((proj, offs))
    forest = Forest(trees, seed)
    forest._flat = FlatForest.from_parts(
        parts,
        [tree.sample_size for tree in trees],
        tables,
        width=width,
        dimensionality=window.shape[1],
    )
    return forest
