"""Numba switch.

Set ``MAXBELL_DISABLE_NUMBA=1`` to run every kernel through its pure-numpy
fallback. When numba is not importable the fallback is used automatically.
"""
import os

try:
    from numba import njit as _njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

_flag = os.environ.get("MAXBELL_DISABLE_NUMBA", "").strip().lower()
USE_NUMBA = HAVE_NUMBA and _flag not in ("1", "true", "yes", "on")


def jit(fn):
    """Compile ``fn`` with numba when available, else return it unchanged.

    The compiled object keeps the Python original at ``.py_func``.
    """
    if not HAVE_NUMBA:
        fn.py_func = fn
        return fn
    return _njit(cache=True)(fn)
