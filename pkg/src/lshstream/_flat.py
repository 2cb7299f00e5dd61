"""Flat array layout of a built forest, shared by both scoring kernels.

Trees are pointer-heavy tries while they are being built; for scoring they
are frozen into contiguous arrays (preorder nodes, per-node sorted child-key
slices, one projection row per materialized hash function) so a traversal is
just integer indexing plus one small dot product per hop.
"""

from __future__ import annotations

from types import SimpleNamespace
from typing import Dict, List, Sequence

import numpy as np

__all__ = ["FlatForest"]


class FlatForest:
    """Read-only array view over a list of built trees."""

    def __init__(
        self,
        tree_root: np.ndarray,
        tree_psi: np.ndarray,
        func_offset: np.ndarray,
        node_size: np.ndarray,
        node_hash_index: np.ndarray,
        node_child_start: np.ndarray,
        node_child_count: np.ndarray,
        child_keys: np.ndarray,
        child_node: np.ndarray,
        projections: np.ndarray,
        offsets: np.ndarray,
        width: float,
    ):
        self.tree_root = tree_root
        self.tree_psi = tree_psi
        self.func_offset = func_offset
        self.node_size = node_size
        self.node_hash_index = node_hash_index
        self.node_child_start = node_child_start
        self.node_child_count = node_child_count
        self.child_keys = child_keys
        self.child_node = child_node
        self.projections = projections
        self.offsets = offsets
        self.width = float(width)
        for arr in self._arrays():
            arr.flags.writeable = False
        self._mu_cache: Dict[int, np.ndarray] = {}
        self._kernel_cache: Dict[str, object] = {}
        self._py_view = None

    def _arrays(self):
        return (
            self.tree_root,
            self.tree_psi,
            self.func_offset,
            self.node_size,
            self.node_hash_index,
            self.node_child_start,
            self.node_child_count,
            self.child_keys,
            self.child_node,
            self.projections,
            self.offsets,
        )

    @property
    def n_trees(self) -> int:
        return self.tree_root.shape[0]

    @property
    def dimensionality(self) -> int:
        return self.projections.shape[1]

    def mu_values(self, branching_factor: int) -> np.ndarray:
        """Per-tree normalizer mu(psi_i, v), cached per branching factor."""
        cached = self._mu_cache.get(branching_factor)
        if cached is None:
            from .scoring import mu

            cached = np.array(
                [mu(int(p), branching_factor) for p in self.tree_psi], dtype=np.float64
            )
            cached.flags.writeable = False
            self._mu_cache[branching_factor] = cached
        return cached

    def py_view(self) -> SimpleNamespace:
        """Plain-Python list copies for the fallback kernel (cached)."""
        if self._py_view is None:
            self._py_view = SimpleNamespace(
                tree_root=self.tree_root.tolist(),
                func_offset=self.func_offset.tolist(),
                node_size=self.node_size.tolist(),
                node_hash_index=self.node_hash_index.tolist(),
                node_child_start=self.node_child_start.tolist(),
                node_child_count=self.node_child_count.tolist(),
                child_keys=self.child_keys.tolist(),
                child_node=self.child_node.tolist(),
                projections=self.projections.tolist(),
                offsets=self.offsets.tolist(),
                width=self.width,
            )
        return self._py_view

    def structure_bytes(self) -> bytes:
        """Byte serialization of every array, for mutation checks."""
        return b"".join(np.ascontiguousarray(a).tobytes() for a in self._arrays())

    @classmethod
    def from_parts(
        cls,
        parts: Sequence,
        tree_psi: Sequence[int],
        tables: Sequence,
        width: float,
        dimensionality: int,
    ) -> "FlatForest":
        """Assemble from the per-tree emissions produced during building.

        Each part carries tree-local node and child arrays; ids and offsets
        are rebased here. tables[i] is the (projections, offsets) pair whose
        row j holds function j of tree i (None for empty trees).
        """
        t = len(parts)
        tree_root = np.empty(t, dtype=np.int64)
        func_offset = np.empty(t, dtype=np.int64)
        size_blocks = []
        hidx_blocks = []
        cstart_blocks = []
        ccount_blocks = []
        ckey_blocks = []
        cnode_blocks = []
        proj_blocks = []
        offset_blocks = []
        node_base = 0
        child_base = 0
        func_base = 0
        for i, part in enumerate(parts):
            tree_root[i] = part.root_id + node_base if part.root_id >= 0 else -1
            func_offset[i] = func_base
            n_nodes = len(part.size)
            if n_nodes:
                size_blocks.append(np.asarray(part.size, dtype=np.int64))
                hidx_blocks.append(np.asarray(part.hash_index, dtype=np.int64))
                cstart_blocks.append(
                    np.asarray(part.child_start, dtype=np.int64) + child_base
                )
                ccount_blocks.append(np.asarray(part.child_count, dtype=np.int64))
            if part.child_keys:
                ckey_blocks.append(np.asarray(part.child_keys, dtype=np.int64))
                cnode_blocks.append(
                    np.asarray(part.child_node, dtype=np.int64) + node_base
                )
            needed = part.max_internal + 1
            if needed:
                proj, offs = tables[i]
                proj_blocks.append(proj[:needed])
                offset_blocks.append(offs[:needed])
            node_base += n_nodes
            child_base += len(part.child_keys)
            func_base += needed

        def _cat(blocks, dtype=np.int64):
            return (
                np.concatenate(blocks) if blocks else np.zeros(0, dtype=dtype)
            )

        if proj_blocks:
            projections = np.ascontiguousarray(np.vstack(proj_blocks))
        else:
            projections = np.zeros((0, dimensionality), dtype=np.float64)
        return cls(
            tree_root=tree_root,
            tree_psi=np.asarray(tree_psi, dtype=np.int64),
            func_offset=func_offset,
            node_size=_cat(size_blocks),
            node_hash_index=_cat(hidx_blocks),
            node_child_start=_cat(cstart_blocks),
            node_child_count=_cat(ccount_blocks),
            child_keys=_cat(ckey_blocks),
            child_node=_cat(cnode_blocks),
            projections=projections,
            offsets=_cat(offset_blocks, dtype=np.float64),
            width=width,
        )

    @classmethod
    def from_trees(cls, trees: Sequence) -> "FlatForest":
        if not trees:
            raise ValueError("cannot flatten an empty forest")
        m = trees[0].family.dimensionality
        width = trees[0].family.width
        for tree in trees:
            if tree.family.dimensionality != m or tree.family.width != width:
                raise ValueError("trees disagree on dimensionality or bucket width")

        tree_root: List[int] = []
        tree_psi: List[int] = []
        func_offset: List[int] = []
        node_size: List[int] = []
        node_hash_index: List[int] = []
        node_child_start: List[int] = []
        node_child_count: List[int] = []
        child_keys: List[int] = []
        child_node: List[int] = []
        proj_blocks: List[np.ndarray] = []
        offset_blocks: List[np.ndarray] = []
        n_func_rows = 0

        for tree in trees:
            tree_psi.append(tree.sample_size)
            func_offset.append(n_func_rows)
            if tree.root is None:
                tree_root.append(-1)
                continue

            # Level-order walk; a node's id is its position in `pending`, so
            # child ids are known the moment children are queued.
            base = len(node_size)
            tree_root.append(base)
            pending = [tree.root]
            visit = 0
            max_internal = -1
            while visit < len(pending):
                node = pending[visit]
                visit += 1
                node_size.append(node.size)
                node_hash_index.append(node.hash_index)
                if node.children:
                    if node.hash_index > max_internal:
                        max_internal = node.hash_index
                    node_child_start.append(len(child_keys))
                    node_child_count.append(len(node.children))
                    for key in sorted(node.children):
                        child_keys.append(key)
                        child_node.append(base + len(pending))
                        pending.append(node.children[key])
                else:
                    node_child_start.append(0)
                    node_child_count.append(0)

            needed = max_internal + 1
            if needed:
                table = tree.func_projections
                if table is not None and table.shape[0] >= needed:
                    proj_blocks.append(table[:needed])
                    offset_blocks.append(tree.func_offsets[:needed])
                else:
                    fns = [tree.family.function(i) for i in range(needed)]
                    proj_blocks.append(np.vstack([f.projection for f in fns]))
                    offset_blocks.append(np.array([f.offset for f in fns]))
                n_func_rows += needed

        if proj_blocks:
            projections = np.ascontiguousarray(np.vstack(proj_blocks))
            offsets = np.concatenate(offset_blocks)
        else:
            projections = np.zeros((0, m), dtype=np.float64)
            offsets = np.zeros(0, dtype=np.float64)
        return cls(
            tree_root=np.asarray(tree_root, dtype=np.int64),
            tree_psi=np.asarray(tree_psi, dtype=np.int64),
            func_offset=np.asarray(func_offset, dtype=np.int64),
            node_size=np.asarray(node_size, dtype=np.int64),
            node_hash_index=np.asarray(node_hash_index, dtype=np.int64),
            node_child_start=np.asarray(node_child_start, dtype=np.int64),
            node_child_count=np.asarray(node_child_count, dtype=np.int64),
            child_keys=np.asarray(child_keys, dtype=np.int64),
            child_node=np.asarray(child_node, dtype=np.int64),
            projections=projections,
            offsets=np.asarray(offsets, dtype=np.float64),
            width=width,
        )
