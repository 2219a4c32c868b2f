"""Backend selection for the two hot kernels.

On import, prefer the compiled extension; fall back to plain numpy when
it is absent.  ``BACKEND`` records which one is active, and the wrapper
functions normalize dtypes and contiguity so both backends see the same
arrays.
"""

import numpy as np

try:
    from . import _core as _impl
    BACKEND = "compiled"
except ImportError:
    from . import _fallback as _impl
    BACKEND = "python"


def csr_affine_step(indptr, indices, data, c1, w, c2, c3, w_prev, out=None):
    """Return c1 * (A @ w) + c2 * w + c3 * w_prev for CSR-format A."""
    indptr = np.ascontiguousarray(indptr, dtype=np.int64)
    indices = np.ascontiguousarray(indices, dtype=np.int64)
    data = np.ascontiguousarray(data, dtype=np.float64)
    w = np.ascontiguousarray(w, dtype=np.float64)
    w_prev = np.ascontiguousarray(w_prev, dtype=np.float64)
    if out is None:
        out = np.empty_like(w)
    return _impl.csr_affine_step(indptr, indices, data, float(c1), w,
                                 float(c2), float(c3), w_prev, out)


def prefix_at_counts(vals, counts, out=None):
    """Return row-wise prefix sums of ``vals`` evaluated at ``counts``."""
    vals = np.ascontiguousarray(vals, dtype=np.float64)
    counts = np.ascontiguousarray(counts, dtype=np.int64)
    if out is None:
        out = np.empty(counts.shape, dtype=np.float64)
    return _impl.prefix_at_counts(vals, counts, out)
