# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled maximum-spanning-tree kernel; see mst_py for the reference
semantics. The sort is delegated to numpy's stable argsort (shared with the
fallback so tie order is identical); the union-find scan runs in C."""

import numpy as np

cimport numpy as cnp

cnp.import_array()


cdef inline Py_ssize_t _find(cnp.intp_t* parent, Py_ssize_t x) noexcept nogil:
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


def mst_weights(weights):
    """Drop-in replacement for mst_py.mst_weights."""
    w = np.ascontiguousarray(weights, dtype=np.float64)
    if w.ndim != 2:
        raise ValueError(f"weight matrix must be 2-D, got shape {w.shape}")
    cdef Py_ssize_t d_in = w.shape[0]
    cdef Py_ssize_t d_out = w.shape[1]
    if d_in == 0 or d_out == 0:
        raise ValueError("bipartite graph needs at least one vertex per side")

    flat = w.reshape(-1)
    order_arr = np.argsort(-flat, kind="stable")
    out_arr = np.empty(d_in + d_out - 1, dtype=np.float64)
    parent_arr = np.arange(d_in + d_out, dtype=np.intp)
    rank_arr = np.zeros(d_in + d_out, dtype=np.intp)

    cdef const double[::1] values = flat
    cdef cnp.intp_t[::1] order = order_arr
    cdef double[::1] out = out_arr
    cdef cnp.intp_t[::1] parent = parent_arr
    cdef cnp.intp_t[::1] rank = rank_arr

    cdef Py_ssize_t n_vert = d_in + d_out
    cdef Py_ssize_t n_edges = d_in * d_out
    cdef Py_ssize_t taken = 0
    cdef Py_ssize_t idx, e, u, v, tmp
    with nogil:
        for idx in range(n_edges):
            e = order[idx]
            u = _find(&parent[0], e // d_out)
            v = _find(&parent[0], d_in + e % d_out)
            if u == v:
                continue
            if rank[u] < rank[v]:
                tmp = u
                u = v
                v = tmp
            parent[v] = u
            if rank[u] == rank[v]:
                rank[u] += 1
            out[taken] = values[e]
            taken += 1
            if taken == n_vert - 1:
                break
    return out_arr
