"""Kernel backend selection: compiled extension if available, NumPy otherwise.

Set CMFC_PURE_PYTHON=1 to force the fallback (used by the parity tests and
the backend benchmark).  Both backends consume identical pre-drawn uniforms
and return bitwise-identical results.
"""
from __future__ import annotations

import os

import numpy as np

if os.environ.get("CMFC_PURE_PYTHON", "0") == "1":
    from . import _kernels_py as _impl
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _kernels_py as _impl

COMPILED: bool = bool(_impl.COMPILED)

categorical_indices = _impl.categorical_indices
categorical_counts = _impl.categorical_counts
grouped_counts = _impl.grouped_counts


def make_cdf(p: np.ndarray) -> np.ndarray:
    """Cumulative rows along the last axis; final entry pinned to 1.0 so any
    uniform in [0, 1) lands in range."""
    c = np.cumsum(np.ascontiguousarray(p, dtype=np.float64), axis=-1)
    c[..., -1] = 1.0
    return c
