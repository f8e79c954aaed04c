"""Numba availability and the ``RSSE2H2T_DISABLE_NUMBA`` switch.

Set ``RSSE2H2T_DISABLE_NUMBA=1`` before import to force the pure-numpy code
paths even when numba is installed.
"""
from __future__ import annotations

import os

DISABLED = os.environ.get("RSSE2H2T_DISABLE_NUMBA", "").strip().lower() not in ("", "0", "false", "no")

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and not DISABLED


def njit(fn):
    """Compile ``fn`` with numba when available; otherwise return it unchanged."""
    if not HAVE_NUMBA:
        return fn
    return numba.njit(cache=True, nogil=True)(fn)
