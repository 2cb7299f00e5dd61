# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled traversal kernel over a flattened forest.

Arithmetic mirrors `_pykernels` exactly: left-to-right dot product, libm
floor/log/pow, so path lengths agree bit-for-bit between backends.
"""

from libc.math cimport floor, log, pow
from libc.stdint cimport int64_t

import numpy as np

cdef double _EULER_GAMMA = 0.5772156649


cdef inline double _mu(int64_t psi, int64_t v) noexcept:
    if psi <= 1:
        return 0.0
    if psi <= v:
        return 1.0
    return (log(<double> psi) + log(<double> (v - 1)) + _EULER_GAMMA) / log(<double> v) - 0.5


cdef class ForestKernel:
    """Per-forest bound kernel; construct once, score many points."""

    cdef const int64_t[::1] tree_root
    cdef const int64_t[::1] func_offset
    cdef const int64_t[::1] node_size
    cdef const int64_t[::1] node_hash_index
    cdef const int64_t[::1] node_child_start
    cdef const int64_t[::1] node_child_count
    cdef const int64_t[::1] child_keys
    cdef const int64_t[::1] child_node
    cdef const double[:, ::1] projections
    cdef const double[::1] offsets
    cdef double width
    cdef Py_ssize_t n_trees, m

    def __init__(self, flat):
        self.tree_root = flat.tree_root
        self.func_offset = flat.func_offset
        self.node_size = flat.node_size
        self.node_hash_index = flat.node_hash_index
        self.node_child_start = flat.node_child_start
        self.node_child_count = flat.node_child_count
        self.child_keys = flat.child_keys
        self.child_node = flat.child_node
        self.projections = flat.projections
        self.offsets = flat.offsets
        self.width = flat.width
        self.n_trees = flat.tree_root.shape[0]
        self.m = flat.projections.shape[1]

    cdef double _one(self, Py_ssize_t ti, const double[::1] x, double g, int64_t v) noexcept:
        cdef int64_t ni = self.tree_root[ti]
        if ni < 0:
            return -1.0
        cdef int64_t d = 0
        cdef int64_t cc, row, key, lo, hi, mid, cstart
        cdef double acc, e
        cdef Py_ssize_t j
        while True:
            cc = self.node_child_count[ni]
            if cc == 0:
                if d == 0:
                    return _mu(self.node_size[ni], v)
                e = (<double> self.node_hash_index[ni]) / (<double> d)
                return (<double> d) * pow(e, g) + _mu(self.node_size[ni], v)
            row = self.func_offset[ti] + self.node_hash_index[ni]
            acc = 0.0
            for j in range(self.m):
                acc += self.projections[row, j] * x[j]
            key = <int64_t> floor((acc + self.offsets[row]) / self.width)
            cstart = self.node_child_start[ni]
            lo = cstart
            hi = cstart + cc
            while lo < hi:
                mid = (lo + hi) >> 1
                if self.child_keys[mid] < key:
                    lo = mid + 1
                else:
                    hi = mid
            if lo < cstart + cc and self.child_keys[lo] == key:
                ni = self.child_node[lo]
                d += 1
            else:
                e = (<double> (self.node_hash_index[ni] + 1)) / (<double> (d + 1))
                return (<double> (d + 1)) * pow(e, g)

    def path_lengths(self, x, double g, long v):
        """Path length of one point in every tree (NULL trees give -1)."""
        xa = np.ascontiguousarray(x, dtype=np.float64)
        if xa.ndim != 1 or xa.shape[0] != self.m:
            raise ValueError(
                f"point has shape {xa.shape}, expected ({self.m},)"
            )
        cdef const double[::1] xv = xa
        out = np.empty(self.n_trees, dtype=np.float64)
        cdef double[::1] ov = out
        cdef Py_ssize_t ti
        for ti in range(self.n_trees):
            ov[ti] = self._one(ti, xv, g, v)
        return out

    def path_lengths_batch(self, points, double g, long v):
        """Path lengths for an (n, m) block; returns an (n, t) array."""
        pa = np.ascontiguousarray(points, dtype=np.float64)
        if pa.ndim != 2 or pa.shape[1] != self.m:
            raise ValueError(
                f"points have shape {pa.shape}, expected (n, {self.m})"
            )
        cdef const double[:, ::1] pv = pa
        cdef Py_ssize_t n = pv.shape[0]
        out = np.empty((n, self.n_trees), dtype=np.float64)
        cdef double[:, ::1] ov = out
        cdef Py_ssize_t i, ti
        for i in range(n):
            for ti in range(self.n_trees):
                ov[i, ti] = self._one(ti, pv[i], g, v)
        return out
