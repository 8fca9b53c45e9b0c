"""Kernel backend selection.

The compiled extension (_kernels, Cython) is preferred; the numpy fallback
(_kernels_np) is used when the extension is missing, when the host is not
little-endian, or when IDLHASH_BACKEND=python is set. Both expose the same
functions with bit-identical results.
"""

from __future__ import annotations

import os
import sys

from . import _kernels_np

_forced = os.environ.get("IDLHASH_BACKEND", "").strip().lower()

kernels = _kernels_np
if _forced not in ("python", "numpy") and sys.byteorder == "little":
    try:
        from . import _kernels as _compiled

        kernels = _compiled
    except ImportError:
        if _forced == "compiled":
            raise

BACKEND = kernels.BACKEND


def backend_name() -> str:
    """Name of the active kernel backend: "compiled" or "python"."""
    return BACKEND
