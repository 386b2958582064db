"""Numba switch shared by the kernel modules.

Set ``BODT_DISABLE_NUMBA=1`` to run every kernel as plain Python over numpy
arrays. The same source is used on both paths, so results are identical.
"""

import os

_FLAG = os.environ.get("BODT_DISABLE_NUMBA", "").strip().lower()

try:
    import numba
except ImportError:  # pragma: no cover
    numba = None

NUMBA_ENABLED = numba is not None and _FLAG not in ("1", "true", "yes", "on")


def jit(fn):
    """``numba.njit(cache=True)`` when enabled, identity otherwise."""
    if NUMBA_ENABLED:
        return numba.njit(cache=True)(fn)
    return fn


def pure(fn):
    """The uncompiled Python body of a kernel, whichever path is active."""
    return getattr(fn, "py_func", fn)
