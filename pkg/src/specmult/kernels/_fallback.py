"""Pure-Python reference implementations of the hot kernels.

Used whenever the compiled extension is unavailable.  Both backends
expose the same two functions with identical semantics; the test suite
checks them against each other whenever the compiled module is present.
"""

import numpy as np


def csr_affine_step(indptr, indices, data, c1, w, c2, c3, w_prev, out):
    """out = c1 * (A @ w) + c2 * w + c3 * w_prev for a CSR matrix A.

    This is the inner step of a Chebyshev three-term recurrence; the
    fallback pays for two temporaries, the compiled version fuses the
    whole expression into one pass over the rows.
    """
    n = indptr.shape[0] - 1
    # scipy-free CSR matvec; row loop is vectorized via reduceat
    av = np.empty(n, dtype=np.float64)
    prod = data * w[indices]
    # reduceat misbehaves on empty rows, so guard with explicit slicing
    if indptr[0] == 0 and np.all(np.diff(indptr) > 0):
        av[:] = np.add.reduceat(prod, indptr[:-1])
    else:
        for i in range(n):
            av[i] = prod[indptr[i]:indptr[i + 1]].sum()
    out[:] = c1 * av + c2 * w + c3 * w_prev
    return out


def prefix_at_counts(vals, counts, out):
    """out[i, t] = vals[i, :counts[i, t]].sum() with one cumsum per row.

    vals is (n, m), counts is (n, T) with entries in [0, m]; rows of
    counts need not be sorted.
    """
    csum = np.cumsum(vals, axis=1)
    idx = counts - 1
    gathered = np.take_along_axis(csum, np.maximum(idx, 0), axis=1)
    out[:] = np.where(idx >= 0, gathered, 0.0)
    return out
