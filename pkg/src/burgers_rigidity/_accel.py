"""Numba switch.

Set ``BURGERS_RIGIDITY_NO_NUMBA=1`` before import to force the pure-numpy
kernels. Numba is also skipped silently when it is not importable.
"""

import os

_DISABLED = os.environ.get("BURGERS_RIGIDITY_NO_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}

try:
    if _DISABLED:
        raise ImportError
    from numba import njit as _njit

    HAS_NUMBA = True
except ImportError:
    _njit = None
    HAS_NUMBA = False


def use_numba():
    return HAS_NUMBA


def njit(func):
    """``numba.njit(cache=True)`` when available, otherwise return ``func`` unchanged."""
    if _njit is None:
        return func
    return _njit(cache=True)(func)
