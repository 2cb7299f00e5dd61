"""Pure-Python traversal kernel, the fallback when the extension is absent.

Operates on list copies of the flat arrays (ndarray scalar indexing is slow
in tight loops). Arithmetic is kept step-for-step identical to the compiled
kernel: same accumulation order, same floor/pow calls, so both produce
bit-identical path lengths.
"""

from __future__ import annotations

import math
from bisect import bisect_left

import numpy as np

from .scoring import mu

__all__ = ["ForestKernel"]


class ForestKernel:
    def __init__(self, flat):
        view = flat.py_view()
        self.tree_root = view.tree_root
        self.func_offset = view.func_offset
        self.node_size = view.node_size
        self.node_hash_index = view.node_hash_index
        self.node_child_start = view.node_child_start
        self.node_child_count = view.node_child_count
        self.child_keys = view.child_keys
        self.child_node = view.child_node
        self.projections = view.projections
        self.offsets = view.offsets
        self.width = view.width
        self.n_trees = len(view.tree_root)
        self.m = flat.dimensionality

    def _one(self, ti: int, x, g: float, v: int) -> float:
        ni = self.tree_root[ti]
        if ni < 0:
            return -1.0
        base = self.func_offset[ti]
        sizes = self.node_size
        indices = self.node_hash_index
        starts = self.node_child_start
        counts = self.node_child_count
        keys = self.child_keys
        nodes = self.child_node
        d = 0
        while True:
            cc = counts[ni]
            if cc == 0:
                if d == 0:
                    return mu(sizes[ni], v)
                e = indices[ni] / d
                return d * e**g + mu(sizes[ni], v)
            row = self.projections[base + indices[ni]]
            acc = 0.0
            for j in range(self.m):
                acc += row[j] * x[j]
            key = math.floor((acc + self.offsets[base + indices[ni]]) / self.width)
            lo = starts[ni]
            pos = bisect_left(keys, key, lo, lo + cc)
            if pos < lo + cc and keys[pos] == key:
                ni = nodes[pos]
                d += 1
            else:
                e = (indices[ni] + 1) / (d + 1)
                return (d + 1) * e**g

    def path_lengths(self, x, g: float, v: int) -> np.ndarray:
        xa = np.ascontiguousarray(x, dtype=np.float64)
        if xa.ndim != 1 or xa.shape[0] != self.m:
            raise ValueError(f"point has shape {xa.shape}, expected ({self.m},)")
        xs = xa.tolist()
        return np.array(
            [self._one(ti, xs, g, v) for ti in range(self.n_trees)],
            dtype=np.float64,
        )

    def path_lengths_batch(self, points, g: float, v: int) -> np.ndarray:
        pa = np.ascontiguousarray(points, dtype=np.float64)
        if pa.ndim != 2 or pa.shape[1] != self.m:
            raise ValueError(f"points have shape {pa.shape}, expected (n, {self.m})")
        rows = pa.tolist()
        out = np.empty((len(rows), self.n_trees), dtype=np.float64)
        for i, xs in enumerate(rows):
            for ti in range(self.n_trees):
                out[i, ti] = self._one(ti, xs, g, v)
        return out
