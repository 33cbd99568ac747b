"""Spanning-tree kernels with a compiled core and a pure-Python fallback.

Reducing one activation graph costs a Kruskal pass over d_in * d_out edges,
and the whole pipeline performs one such pass per sample per layer, so this
is the hot loop of the package. The compiled extension (mst_cy) is selected
at import time when present; otherwise the numpy/Python fallback (mst_py)
takes over with identical results. Set TOPOMON_FORCE_PYTHON_KERNEL=1 to pin
the fallback, e.g. when benchmarking.
"""

import os

from . import mst_py

try:
    from . import mst_cy as _compiled
except ImportError:
    _compiled = None

if _compiled is not None and not os.environ.get("TOPOMON_FORCE_PYTHON_KERNEL"):
    _active = _compiled
else:
    _active = mst_py

mst_weights = _active.mst_weights

HAVE_COMPILED = _compiled is not None


def backend_name() -> str:
    """Name of the kernel backend selected at import: 'cython' or 'python'."""
    return "cython" if _active is _compiled else "python"


def available_backends() -> dict:
    """Map backend name -> mst_weights callable, for parity tests and
    benchmarks."""
    backends = {"python": mst_py.mst_weights}
    if _compiled is not None:
        backends["cython"] = _compiled.mst_weights
    return backends
