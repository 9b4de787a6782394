"""Pure-NumPy sampling kernels.

Reference implementation of the hot inner loops; cmfc._kernels is the
compiled drop-in.  Both map pre-drawn uniforms through cumulative
distribution rows, so results are bitwise identical across backends and
the caller's Generator is consumed the same way regardless of backend.
"""
from __future__ import annotations

import numpy as np

COMPILED = False


def categorical_indices(cdf: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Map uniforms in [0, 1) to category indices via a cdf row (last entry 1)."""
    idx = np.searchsorted(cdf, u, side="right")
    return np.minimum(idx, cdf.shape[0] - 1).astype(np.int64)


def categorical_counts(cdf: np.ndarray, u: np.ndarray) -> np.ndarray:
    idx = np.searchsorted(cdf, u, side="right")
    idx = np.minimum(idx, cdf.shape[0] - 1)
    return np.bincount(idx, minlength=cdf.shape[0]).astype(np.int64)


def grouped_counts(cdfs: np.ndarray, sizes: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Per-group categorical counts.

    Group g consumes sizes[g] consecutive uniforms from u and tallies them
    against cdf row g.  Returns an (n_groups, k) count matrix.
    """
    n_groups, k = cdfs.shape
    out = np.zeros((n_groups, k), dtype=np.int64)
    offset = 0
    for g in range(n_groups):
        n = int(sizes[g])
        if n == 0:
            continue
        idx = np.searchsorted(cdfs[g], u[offset:offset + n], side="right")
        idx = np.minimum(idx, k - 1)
        out[g] = np.bincount(idx, minlength=k)
        offset += n
    return out
