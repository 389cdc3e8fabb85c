"""Optional numba acceleration.

Set ``OKGD_DISABLE_NUMBA=1`` to force the pure-numpy code paths. When numba
is missing the numpy paths are used regardless of the flag.
"""
import os

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None
    HAVE_NUMBA = False

_disabled = os.environ.get("OKGD_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes", "on")
USE_NUMBA = HAVE_NUMBA and not _disabled


def njit(func):
    """Compile ``func`` in nopython mode if numba is importable, else return it."""
    if not HAVE_NUMBA:
        return func
    return numba.njit(cache=True, nogil=True)(func)
