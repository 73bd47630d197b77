"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the numpy
fallback is used.  Setting ``BOURGAINLAB_PURE=1`` forces the fallback.
"""

import os

from bourgainlab import _kernels_py

try:
    if os.environ.get("BOURGAINLAB_PURE"):
        raise ImportError("pure backend requested")
    from bourgainlab import _kernels as _compiled
except ImportError:
    _compiled = None

BACKEND = "cython" if _compiled is not None else "python"
_impl = _compiled if _compiled is not None else _kernels_py

pair_counts = _impl.pair_counts
convolve_naive = _impl.convolve_naive

__all__ = ["BACKEND", "pair_counts", "convolve_naive"]
