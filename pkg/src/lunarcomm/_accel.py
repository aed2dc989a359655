"""Selects between numba-compiled kernels and the pure numpy fallback.

Set ``LUNARCOMM_NUMBA=0`` in the environment before import to force the
numpy path. The numba path is used whenever numba imports cleanly and the
flag is not disabled.
"""
from __future__ import annotations

import os

_FLAG = os.environ.get("LUNARCOMM_NUMBA", "1").strip().lower()

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and _FLAG not in ("0", "false", "no", "off")


def njit(fn):
    """Compile ``fn`` with ``numba.njit(cache=True)`` if numba is available.

    Without numba the plain Python function is returned so that the module
    still imports; callers only reach it through the dispatch in
    :mod:`lunarcomm.kernels` when ``USE_NUMBA`` is true.
    """
    if not HAVE_NUMBA:
        return fn
    return numba.njit(cache=True)(fn)
