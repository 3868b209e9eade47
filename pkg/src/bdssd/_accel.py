"""Numba switch.

Hot kernels are written twice: an explicit loop compiled with numba, and a
vectorized numpy version. ``USE_NUMBA`` picks which one the public API uses.
Set ``BDSSD_DISABLE_NUMBA=1`` to force the numpy path (numba is also skipped
when it is not installed).
"""

import os

try:
    import numba
except ImportError:  # pragma: no cover - numba is an optional extra
    numba = None

HAS_NUMBA = numba is not None

_flag = os.environ.get("BDSSD_DISABLE_NUMBA", "").strip().lower()
USE_NUMBA = HAS_NUMBA and _flag not in ("1", "true", "yes", "on")


def njit(func):
    """Compile ``func`` in nopython mode, or return it unchanged without numba."""
    if numba is None:
        return func
    return numba.njit(cache=True)(func)


def backend_name():
    return "numba" if USE_NUMBA else "numpy"
