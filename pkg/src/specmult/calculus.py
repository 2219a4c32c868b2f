"""Functional calculus for nonnegative self-adjoint operators.

Operators act on L^2 of a finite metric measure space with the weighted
inner product <f, g> = sum_x f(x) g(x) mu(x).  Self-adjointness in that
product is the mu-symmetry mu(x) A(x, y) = mu(y) A(y, x); it is checked
at construction.  Kernels follow the convention

    (T f)(x) = sum_y K(x, y) f(y) mu(y),

so the identity has kernel diag(1 / mu) and kernels of real symbols are
symmetric matrices.

The dense path diagonalizes D^(1/2) A D^(-1/2) (D = diag(mu)) with a
symmetric eigensolver and maps the orthonormal frame back to a
mu-orthonormal one.  Dense decomposition is deliberately capped at
N = 2048 points; beyond that only the Chebyshev path is offered.
"""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .kernels import csr_affine_step

MAX_DENSE_N = 2048
TOL_EIG_REL = 1e-10


@dataclass(frozen=True)
class SelfAdjointOperator:
    """Matrix (dense or CSR) that is symmetric in the mu inner product."""

    matrix: object
    space: object

    def __post_init__(self):
        a = self.matrix
        n = self.space.n_points
        if a.shape != (n, n):
            raise ValueError("operator shape %s does not match %d points"
                             % (a.shape, n))
        mu = self.space.measure
        if sp.issparse(a):
            a = a.tocsr()
            object.__setattr__(self, "matrix", a)
            weighted = a.multiply(mu[:, None]).tocsr()
            defect = abs(weighted - weighted.T)
            scale = max(1.0, abs(weighted).max())
            if defect.nnz and defect.max() > 1e-9 * scale:
                raise ValueError("operator is not symmetric in the measure "
                                 "inner product")
        else:
            a = np.ascontiguousarray(a, dtype=np.float64)
            object.__setattr__(self, "matrix", a)
            weighted = mu[:, None] * a
            scale = max(1.0, np.abs(weighted).max())
            if np.abs(weighted - weighted.T).max() > 1e-9 * scale:
                raise ValueError("operator is not symmetric in the measure "
                                 "inner product")

    @property
    def n_points(self):
        return self.space.n_points

    @property
    def is_sparse(self):
        return sp.issparse(self.matrix)

    def matvec(self, f):
        return self.matrix @ f


def estimate_spectral_radius(op, iters=200, tol=1e-8, seed=0):
    """Largest eigenvalue by power iteration on the symmetrized matrix."""
    s = np.sqrt(op.space.measure)
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(op.n_points)
    v /= np.linalg.norm(v)
    prev = 0.0
    lam = 0.0
    for _ in range(iters):
        w = s * (op.matrix @ (v / s))
        nrm = np.linalg.norm(w)
        if nrm == 0:
            return 0.0
        v = w / nrm
        lam = float(v @ (s * (op.matrix @ (v / s))))
        if abs(lam - prev) <= tol * max(1.0, abs(lam)):
            break
        prev = lam
    return lam


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues (ascending, clamped at 0) and mu-orthonormal vectors.

    Column i of ``vectors`` is the eigenfunction for ``eigenvalues[i]``;
    the columns satisfy <u_i, u_j>_mu = delta_ij.
    """

    eigenvalues: np.ndarray
    vectors: np.ndarray
    space: object
    tol_eig: float
    _fs_cache: dict = field(default_factory=dict, repr=False, compare=False)

    @cached_property
    def sqrt_eigenvalues(self):
        return np.sqrt(self.eigenvalues)

    @cached_property
    def sym_vectors(self):
        """Orthonormal frame Q = D^(1/2) U of the symmetrized matrix."""
        return np.sqrt(self.space.measure)[:, None] * self.vectors

    @property
    def n_points(self):
        return self.eigenvalues.shape[0]


def spectral_decompose(op):
    """Full dense eigendecomposition; refuses more than 2048 points."""
    n = op.n_points
    if n > MAX_DENSE_N:
        raise ValueError(
            "dense decomposition is capped at %d points (got %d); "
            "use chebyshev_apply for large spaces" % (MAX_DENSE_N, n))
    a = op.matrix.toarray() if op.is_sparse else op.matrix
    s = np.sqrt(op.space.measure)
    m = (s[:, None] / s[None, :]) * a
    m = 0.5 * (m + m.T)
    w, q = np.linalg.eigh(m)
    tol = TOL_EIG_REL * max(1.0, float(np.abs(w).max()))
    if w[0] < -tol:
        raise ValueError("operator has an eigenvalue %g below 0 beyond "
                         "tolerance %g" % (w[0], tol))
    w = np.maximum(w, 0.0)
    u = q / s[:, None]
    return SpectralDecomposition(eigenvalues=w, vectors=u, space=op.space,
                                 tol_eig=tol)


def apply_spectral(decomp, g, f):
    """Apply sum_i g_i <f, u_i>_mu u_i for given per-eigenvalue factors."""
    g = np.asarray(g, dtype=np.float64)
    if g.shape != decomp.eigenvalues.shape:
        raise ValueError("need one factor per eigenvalue")
    coeff = decomp.vectors.T @ (decomp.space.measure * np.asarray(f))
    if coeff.ndim == 1:
        return decomp.vectors @ (g * coeff)
    return decomp.vectors @ (g[:, None] * coeff)


def spectral_kernel(decomp, g):
    """Kernel matrix of the operator with per-eigenvalue factors g."""
    g = np.asarray(g, dtype=np.float64)
    if g.shape != decomp.eigenvalues.shape:
        raise ValueError("need one factor per eigenvalue")
    return (decomp.vectors * g) @ decomp.vectors.T


def apply_multiplier(decomp, F, f):
    """F(sqrt(L)) f through the eigendecomposition."""
    return apply_spectral(decomp, F(decomp.sqrt_eigenvalues), f)


def multiplier_kernel(decomp, F):
    """Kernel of F(sqrt(L)) in the measure-weighted convention."""
    return spectral_kernel(decomp, F(decomp.sqrt_eigenvalues))


def heat_kernel(decomp, t):
    """Kernel of exp(-t L)."""
    if t < 0:
        raise ValueError("heat time must be nonnegative")
    return spectral_kernel(decomp, np.exp(-t * decomp.eigenvalues))


def apply_heat(decomp, t, f):
    if t < 0:
        raise ValueError("heat time must be nonnegative")
    return apply_spectral(decomp, np.exp(-t * decomp.eigenvalues), f)


def wave_kernel(decomp, t):
    """Kernel of cos(t sqrt(L)), the even wave propagator."""
    return spectral_kernel(decomp, np.cos(t * decomp.sqrt_eigenvalues))


def apply_wave(decomp, t, f):
    return apply_spectral(decomp, np.cos(t * decomp.sqrt_eigenvalues), f)


# -- Chebyshev fast path ---------------------------------------------------

@dataclass(frozen=True)
class ChebyshevResult:
    """Filtered vector plus an a priori error bound.

    ``sup_error`` bounds the uniform gap between the target symbol and
    the Chebyshev approximant on [0, spectral_bound]; by the spectral
    theorem the output is within sup_error * ||f||_L2(mu) of the exact
    F(sqrt(L)) f in the L2(mu) norm.
    """

    values: np.ndarray
    degree: int
    spectral_bound: float
    sup_error: float


def chebyshev_coefficients(F, bound, degree, quad_points=None):
    """Cosine-quadrature Chebyshev coefficients of lam -> F(sqrt(lam)).

    Returned array c has length degree + 1 and approximates the symbol
    as c[0]/2 + sum_{k>=1} c[k] T_k on [-1, 1] after the affine map from
    [0, bound].
    """
    if degree < 1:
        raise ValueError("degree must be >= 1")
    if bound <= 0:
        raise ValueError("spectral bound must be positive")
    q = quad_points or max(4 * (degree + 1), 512)
    theta = np.pi * (np.arange(q) + 0.5) / q
    lam = 0.5 * bound * (np.cos(theta) + 1.0)
    vals = F(np.sqrt(lam))
    k = np.arange(degree + 1)
    return (2.0 / q) * (np.cos(np.outer(k, theta)) @ vals)


def _cheb_sup_error(F, bound, coeffs, grid_points=4001):
    lam = np.linspace(0.0, bound, grid_points)
    x = 2.0 * lam / bound - 1.0
    c = coeffs.copy()
    c[0] *= 0.5
    approx = np.polynomial.chebyshev.chebval(x, c)
    err = float(np.abs(F(np.sqrt(lam)) - approx).max())
    # guard against features the evaluation grid might straddle
    return err + float(np.abs(coeffs[-1]))


def chebyshev_apply(op, F, f, degree=64, spectral_bound=None):
    """F(sqrt(L)) f by Chebyshev recurrence, no eigendecomposition.

    Works for any operator size; this is the only route past the dense
    cap.  ``spectral_bound`` must dominate the top eigenvalue; when
    omitted it is taken as 1.05 times a power-iteration estimate.
    """
    f = np.ascontiguousarray(f, dtype=np.float64)
    if f.shape != (op.n_points,):
        raise ValueError("input vector length does not match the space")
    if spectral_bound is None:
        spectral_bound = 1.05 * estimate_spectral_radius(op)
    if spectral_bound <= 0:
        raise ValueError("spectral bound must be positive")
    b = float(spectral_bound)
    coeffs = chebyshev_coefficients(F, b, degree)

    a = op.matrix
    use_csr = sp.issparse(a)
    if use_csr:
        a = a.tocsr()
        indptr = a.indptr.astype(np.int64)
        indices = a.indices.astype(np.int64)
        data = a.data.astype(np.float64)

        def first_step(w):
            return csr_affine_step(indptr, indices, data, 2.0 / b, w,
                                   -1.0, 0.0, w)

        def step(w, w_prev):
            return csr_affine_step(indptr, indices, data, 4.0 / b, w,
                                   -2.0, -1.0, w_prev)
    else:
        def first_step(w):
            return (2.0 / b) * (a @ w) - w

        def step(w, w_prev):
            return (4.0 / b) * (a @ w) - 2.0 * w - w_prev

    w_prev = f
    acc = 0.5 * coeffs[0] * f
    if degree >= 1:
        w = first_step(f)
        acc = acc + coeffs[1] * w
    for k in range(2, degree + 1):
        w, w_prev = step(w, w_prev), w
        acc = acc + coeffs[k] * w
    return ChebyshevResult(values=acc, degree=degree, spectral_bound=b,
                           sup_error=_cheb_sup_error(F, b, coeffs))


# -- propagation checks ----------------------------------------------------

def set_distance(space, left, right):
    """min distance between two index sets."""
    left = np.asarray(left, dtype=np.intp)
    right = np.asarray(right, dtype=np.intp)
    if left.size == 0 or right.size == 0:
        raise ValueError("set distance needs nonempty sets")
    return float(space.distance[np.ix_(left, right)].min())


def block_operator_norm(space, kernel, rows, cols):
    """L2(mu) -> L2(mu) norm of the kernel restricted to rows x cols."""
    s = np.sqrt(space.measure)
    block = (s[rows])[:, None] * kernel[np.ix_(rows, cols)] * s[cols]
    if min(block.shape) == 0:
        return 0.0
    return float(np.linalg.svd(block, compute_uv=False)[0])


@dataclass(frozen=True)
class GaussianDecayReport:
    """Least-squares fit of log ||P_F exp(-tL) P_E|| against d^2 / t."""

    fitted_c: float
    prefactor: float
    rows: list
    max_residual: float

    def __iter__(self):
        return iter(self.rows)


def verify_davies_gaffney(decomp, pairs, t_grid):
    """Fit the Gaussian decay rate of the heat semigroup between sets.

    ``pairs`` is a list of (E, F) index-set pairs with positive
    separation; for each pair and each t the L2(mu) -> L2(mu) norm of
    the localized heat operator is recorded, then log-norm is regressed
    on -d(E, F)^2 / t.  The fitted c is the reciprocal slope; rows hold
    (d, t, norm) samples and max_residual the worst gap to the fit in
    log units.
    """
    t_grid = np.asarray(t_grid, dtype=np.float64)
    if t_grid.size == 0 or np.any(t_grid <= 0):
        raise ValueError("time grid must be positive and nonempty")
    if not pairs:
        raise ValueError("need at least one set pair")
    space = decomp.space
    seps = []
    for left, right in pairs:
        d = set_distance(space, left, right)
        if d <= 0:
            raise ValueError("set pairs must have positive separation")
        seps.append(d)
    xs, ys, rows = [], [], []
    for t in t_grid:
        kern = heat_kernel(decomp, t)
        for d, (left, right) in zip(seps, pairs):
            a = block_operator_norm(space, kern, np.asarray(left),
                                    np.asarray(right))
            if a <= 0:
                continue
            xs.append(d * d / t)
            ys.append(np.log(a))
            rows.append((d, float(t), a))
    if len(xs) < 3:
        raise ValueError("too few usable samples for the decay fit")
    xs = np.asarray(xs)
    ys = np.asarray(ys)
    slope, intercept = np.polyfit(xs, ys, 1)
    if slope >= 0:
        raise ValueError("heat localization norms do not decay in d^2/t")
    resid = float(np.abs(ys - (slope * xs + intercept)).max())
    return GaussianDecayReport(fitted_c=float(-1.0 / slope),
                               prefactor=float(np.exp(intercept)),
                               rows=rows, max_residual=resid)


@dataclass(frozen=True)
class PropagationReport:
    """Support radius of a propagator kernel at a mass tolerance.

    ``effective_radius`` is the largest over columns of the smallest
    radius capturing all but ``mass_tol`` of the column's L2(mu) mass;
    the verdict compares it against ``allowed_radius``.
    """

    t: float
    mass_tol: float
    effective_radius: float
    allowed_radius: float
    within_cone: bool
    worst_column: int


def kernel_mass_radii(space, kernel, mass_tol):
    """Per-column radius holding all but mass_tol of the squared mass."""
    q = space.measure[None, :] * kernel ** 2   # row y: profile over x
    q_sorted = np.take_along_axis(q, space.distance_order, axis=1)
    totals = q_sorted.sum(axis=1)
    totals = np.maximum(totals, 1e-300)
    tail = totals[:, None] - np.cumsum(q_sorted, axis=1)
    ok = tail <= mass_tol * totals[:, None]
    first = np.argmax(ok, axis=1)
    return space.sorted_distance[np.arange(space.n_points), first]


def mass_outside_radius(space, kernel, radius):
    """Worst column fraction of squared kernel mass beyond the radius."""
    q = space.measure[None, :] * kernel ** 2
    totals = np.maximum(q.sum(axis=1), 1e-300)
    outside = np.where(space.distance > radius, q, 0.0).sum(axis=1)
    return float((outside / totals).max())


def verify_finite_speed(decomp, t, mass_tol=1e-3, speed=1.0):
    """Check that cos(t sqrt(L)) stays inside the cone of the given speed.

    The allowed radius is speed * t plus a 10 percent margin and two
    grid spacings of cushion; the wave front is a lattice object and
    lands between grid shells.
    """
    if t <= 0:
        raise ValueError("propagation time must be positive")
    if not (0 < mass_tol < 1):
        raise ValueError("mass tolerance must lie in (0, 1)")
    space = decomp.space
    kern = wave_kernel(decomp, t)
    radii = kernel_mass_radii(space, kern, mass_tol)
    worst = int(np.argmax(radii))
    eff = float(radii[worst])
    allowed = 1.1 * speed * t + 2.0 * space.min_spacing
    return PropagationReport(t=float(t), mass_tol=float(mass_tol),
                             effective_radius=eff, allowed_radius=allowed,
                             within_cone=bool(eff <= allowed),
                             worst_column=worst)


def require_finite_speed(decomp, t, mass_tol=1e-3, speed=1.0):
    """Cached gate used by estimates that presuppose cone confinement."""
    key = (round(float(t), 12), float(mass_tol), float(speed))
    report = decomp._fs_cache.get(key)
    if report is None:
        report = verify_finite_speed(decomp, t, mass_tol, speed)
        decomp._fs_cache[key] = report
    if not report.within_cone:
        raise ValueError(
            "wave propagator at t=%g escapes the speed-%g cone "
            "(radius %.3f > allowed %.3f); the estimate's hypotheses fail "
            "on this operator" % (t, speed, report.effective_radius,
                                  report.allowed_radius))
    return report
