"""Kernel dispatch: compiled extension when available, numpy fallback otherwise.

Set ``ABDIRAC_PURE_PYTHON=1`` to force the fallback.
"""
from __future__ import annotations

import os

from . import _kernels_py

BACKEND = "python"
if os.environ.get("ABDIRAC_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]
        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _kernels_py
else:
    _impl = _kernels_py

sturm_count = _impl.sturm_count
rk4_final = _impl.rk4_final
rk4_path = _impl.rk4_path
