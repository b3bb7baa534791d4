"""Backend selection for the hot numeric kernels.

Every kernel in :mod:`sphdki._kernels` exists twice: a numba ``@njit`` loop
version and a vectorised numpy version. The numba path is used when numba
imports cleanly and ``SPHDKI_NO_NUMBA`` is unset (or ``0``). Both paths must
agree to roundoff; ``tests/test_backends.py`` checks that.
"""
import os

_flag = os.environ.get("SPHDKI_NO_NUMBA", "").strip().lower()

try:
    from numba import njit
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False
    njit = None

USE_NUMBA = HAVE_NUMBA and _flag in ("", "0", "false", "no")


def backend():
    """Name of the active backend, ``"numba"`` or ``"numpy"``."""
    return "numba" if USE_NUMBA else "numpy"
