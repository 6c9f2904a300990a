"""Numba acceleration switch.

Hot kernels (tree split search, tree traversal) are compiled with numba
unless BELLWETHER_NO_NUMBA=1 is set, in which case pure-numpy fallbacks
are used. Both paths produce the same results.
"""

import os


def _numba_disabled() -> bool:
    return os.environ.get("BELLWETHER_NO_NUMBA", "").strip().lower() in ("1", "true", "yes")


try:
    import numba  # noqa: F401

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover
    NUMBA_AVAILABLE = False

USE_NUMBA = NUMBA_AVAILABLE and not _numba_disabled()
