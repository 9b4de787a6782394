# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled sampling kernels: fused cdf-inversion loops.

Semantics match cmfc._kernels_py exactly (same cdf rows, same clamping),
so outputs are bitwise identical to the NumPy fallback.
"""
import numpy as np

cimport numpy as cnp

cnp.import_array()

COMPILED = True


cdef inline Py_ssize_t _invert(const double[::1] cdf, double u, Py_ssize_t k) nogil:
    # First index j with u < cdf[j]; clamp to k-1 (matches searchsorted "right").
    cdef Py_ssize_t lo = 0, hi = k, mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if cdf[mid] <= u:
            lo = mid + 1
        else:
            hi = mid
    if lo > k - 1:
        lo = k - 1
    return lo


def categorical_indices(const double[::1] cdf, const double[::1] u):
    cdef Py_ssize_t n = u.shape[0], k = cdf.shape[0], i
    out_arr = np.empty(n, dtype=np.int64)
    cdef cnp.int64_t[::1] out = out_arr
    with nogil:
        for i in range(n):
            out[i] = _invert(cdf, u[i], k)
    return out_arr


def categorical_counts(const double[::1] cdf, const double[::1] u):
    cdef Py_ssize_t n = u.shape[0], k = cdf.shape[0], i
    out_arr = np.zeros(k, dtype=np.int64)
    cdef cnp.int64_t[::1] out = out_arr
    with nogil:
        for i in range(n):
            out[_invert(cdf, u[i], k)] += 1
    return out_arr


def grouped_counts(const double[:, ::1] cdfs, const cnp.int64_t[::1] sizes,
                   const double[::1] u):
    cdef Py_ssize_t n_groups = cdfs.shape[0], k = cdfs.shape[1]
    cdef Py_ssize_t g, i, offset = 0
    out_arr = np.zeros((n_groups, k), dtype=np.int64)
    cdef cnp.int64_t[:, ::1] out = out_arr
    with nogil:
        for g in range(n_groups):
            for i in range(sizes[g]):
                out[g, _invert(cdfs[g], u[offset + i], k)] += 1
            offset += sizes[g]
    return out_arr
