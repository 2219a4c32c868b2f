# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: fused CSR recurrence step and sorted-prefix sums."""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def csr_affine_step(cnp.int64_t[::1] indptr, cnp.int64_t[::1] indices,
                    double[::1] data, double c1, double[::1] w,
                    double c2, double c3, double[::1] w_prev,
                    double[::1] out):
    """out = c1 * (A @ w) + c2 * w + c3 * w_prev, single pass per row."""
    cdef Py_ssize_t n = indptr.shape[0] - 1
    cdef Py_ssize_t i, k
    cdef double acc
    for i in range(n):
        acc = 0.0
        for k in range(indptr[i], indptr[i + 1]):
            acc += data[k] * w[indices[k]]
        out[i] = c1 * acc + c2 * w[i] + c3 * w_prev[i]
    return np.asarray(out)


def prefix_at_counts(double[:, ::1] vals, cnp.int64_t[:, ::1] counts,
                     double[:, ::1] out):
    """out[i, t] = vals[i, :counts[i, t]].sum() without materializing cumsums.

    Exploits sorted rows of counts when present; falls back to a restart
    whenever a row of counts decreases.
    """
    cdef Py_ssize_t n = vals.shape[0]
    cdef Py_ssize_t T = counts.shape[1]
    cdef Py_ssize_t i, t, j, target
    cdef double acc
    for i in range(n):
        acc = 0.0
        j = 0
        for t in range(T):
            target = counts[i, t]
            if target < j:
                acc = 0.0
                j = 0
            while j < target:
                acc += vals[i, j]
                j += 1
            out[i, t] = acc
    return np.asarray(out)
