"""Timing comparison of the compiled and pure-Python hot kernels.

Run as a script; prints a small table of best-of-N wall times for each
kernel under both backends, plus an end-to-end polynomial apply at the
performance-path scale.  The compiled section is skipped gracefully if
the extension did not build.
"""

import time

import numpy as np
import scipy.sparse as sp

from specmult.calculus import SelfAdjointOperator, chebyshev_apply
from specmult.kernels import BACKEND, _fallback
from specmult import multiplier as mult
from specmult.scenarios import torus1d

try:
    from specmult.kernels import _core
except ImportError:
    _core = None


def best_of(fn, reps=7):
    best = np.inf
    for _ in range(reps):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_csr_affine(n=200_000):
    _, op = torus1d(n, 0.25)
    a = op.matrix
    indptr = a.indptr.astype(np.int64)
    indices = a.indices.astype(np.int64)
    data = a.data
    rng = np.random.default_rng(0)
    w = rng.standard_normal(n)
    w_prev = rng.standard_normal(n)
    out = np.empty(n)
    rows = []
    for name, impl in (("compiled", _core), ("python", _fallback)):
        if impl is None:
            continue
        t = best_of(lambda: impl.csr_affine_step(
            indptr, indices, data, 2.0, w, -1.0, -1.0, w_prev, out))
        rows.append((name, t))
    return "csr_affine_step n=%d" % n, rows


def bench_prefix(n=1024, m=2048, t_count=64):
    rng = np.random.default_rng(1)
    vals = rng.random((n, m))
    counts = np.sort(rng.integers(0, m + 1, size=(n, t_count)), axis=1)
    counts = np.ascontiguousarray(counts, dtype=np.int64)
    out = np.empty(counts.shape)
    rows = []
    for name, impl in (("compiled", _core), ("python", _fallback)):
        if impl is None:
            continue
        t = best_of(lambda: impl.prefix_at_counts(vals, counts, out))
        rows.append((name, t))
    return "prefix_at_counts %dx%d@%d" % (n, m, t_count), rows


def bench_chebyshev(n=100_000, degree=128):
    space, op = torus1d(n, 0.25)
    f = np.zeros(n)
    f[n // 2] = 1.0
    F = mult.gaussian(2.0)
    t0 = time.perf_counter()
    chebyshev_apply(op, F, f, degree=degree)
    return ("chebyshev_apply n=%d deg=%d (backend=%s)"
            % (n, degree, BACKEND)), [(BACKEND, time.perf_counter() - t0)]


def main():
    print("active backend: %s" % BACKEND)
    for maker in (bench_csr_affine, bench_prefix, bench_chebyshev):
        label, rows = maker()
        print(label)
        base = dict(rows).get("python")
        for name, t in rows:
            speedup = ""
            if base is not None and name == "compiled" and t > 0:
                speedup = "  (%.1fx vs python)" % (base / t)
            print("  %-9s %8.4f s%s" % (name, t, speedup))


if __name__ == "__main__":
    main()
