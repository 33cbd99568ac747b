"""Pure-Python maximum-spanning-tree kernel for dense bipartite graphs.

Reference implementation; `mst_cy` is the compiled twin with identical
semantics. Kruskal over the d_in * d_out complete bipartite edge set: edges
are visited by decreasing weight (ties broken by input index, then output
index, which the stable argsort of the row-major flattening gives for free)
and accepted whenever they join two components.
"""

import numpy as np


def mst_weights(weights):
    """Return the edge weights of a maximum spanning tree of the complete
    bipartite graph whose (i, j) edge weighs ``weights[i, j]``.

    The result has d_in + d_out - 1 entries, sorted non-increasing. The
    weight multiset is unique even when edge weights tie, so any tie order
    yields the same output values.
    """
    w = np.ascontiguousarray(weights, dtype=np.float64)
    if w.ndim != 2:
        raise ValueError(f"weight matrix must be 2-D, got shape {w.shape}")
    d_in, d_out = w.shape
    if d_in == 0 or d_out == 0:
        raise ValueError("bipartite graph needs at least one vertex per side")
    flat = w.ravel()
    order = np.argsort(-flat, kind="stable").tolist()
    values = flat.tolist()

    n_vert = d_in + d_out
    parent = list(range(n_vert))
    rank = [0] * n_vert
    out = np.empty(n_vert - 1, dtype=np.float64)
    taken = 0
    for e in order:
        u = e // d_out
        v = d_in + e % d_out
        # find roots with path halving
        while parent[u] != u:
            parent[u] = parent[parent[u]]
            u = parent[u]
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        if u == v:
            continue
        if rank[u] < rank[v]:
            u, v = v, u
        parent[v] = u
        if rank[u] == rank[v]:
            rank[u] += 1
        out[taken] = values[e]
        taken += 1
        if taken == n_vert - 1:
            break
    return out
