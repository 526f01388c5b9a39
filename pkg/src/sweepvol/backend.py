"""Kernel backend selection.

The hot per-frame kernels come in two interchangeable flavours: numba
@njit loops (fast) and vectorized numpy (no compiler dependency). Both
produce bit-identical output. The numba path is used when numba imports
cleanly; set SWEEPVOL_NO_NUMBA=1 to force the numpy path.
"""

import os

try:
    import numba  # noqa: F401

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False

_disabled = os.environ.get("SWEEPVOL_NO_NUMBA", "").strip().lower() in ("1", "true", "yes")

NUMBA_ENABLED = HAVE_NUMBA and not _disabled


def backend_name() -> str:
    return "numba" if NUMBA_ENABLED else "numpy"
