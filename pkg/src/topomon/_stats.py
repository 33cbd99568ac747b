"""Small statistics helpers shared by monitor and datagen."""

import math

import numpy as np


def nearest_rank_quantile(values, q):
    """Nearest-rank quantile: the element at index ceil(q*n) - 1 of the
    ascending-sorted values.

    The 1e-12 nudge keeps ceil from jumping one rank when q*n lands a few
    ulps above an integer (e.g. 0.1 * 30).
    """
    vals = np.sort(np.asarray(values, dtype=np.float64))
    n = vals.size
    if n == 0:
        raise ValueError("quantile of an empty sequence")
    if not 0.0 < q <= 1.0:
        raise ValueError(f"quantile must be in (0, 1], got {q}")
    rank = math.ceil(q * n - 1e-12)
    rank = min(max(rank, 1), n)
    return float(vals[rank - 1])
