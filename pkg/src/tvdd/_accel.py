"""Numba dispatch switch.

Set ``TVDD_DISABLE_NUMBA=1`` to force the vectorized numpy kernels. The
flag is read once at import time.
"""

import os

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and os.environ.get("TVDD_DISABLE_NUMBA", "0").lower() not in (
    "1",
    "true",
    "yes",
)


def njit(fn):
    """Compile ``fn`` with numba when available, otherwise return it untouched."""
    if not HAVE_NUMBA:
        return fn
    return numba.njit(cache=True, nogil=True)(fn)


def backend():
    return "numba" if USE_NUMBA else "numpy"
