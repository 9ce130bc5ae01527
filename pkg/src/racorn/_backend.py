"""Selects the compiled kernels when importable, the numpy fallback otherwise.

Set ``RACORN_PURE_PYTHON=1`` to force the fallback.
"""

from __future__ import annotations

import os

if os.environ.get("RACORN_PURE_PYTHON", "") not in ("", "0"):
    from racorn import _pykernels as kernels

    BACKEND = "python"
else:
    try:
        from racorn import _ckernels as kernels

        BACKEND = "cython"
    except ImportError:
        from racorn import _pykernels as kernels

        BACKEND = "python"

__all__ = ["BACKEND", "kernels"]
