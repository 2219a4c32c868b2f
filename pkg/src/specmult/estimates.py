"""Restriction-type operator norm estimates and decay experiments.

Norms between L^p spaces here are always measure-weighted.  Exact
values exist at the endpoints:

* p0 = 1 into L^2: the largest column norm of the kernel,
* p0 = 2 into L^2: the top singular value of the symmetrized kernel,
* p0 = 1 into L^inf: the largest kernel entry.

Intermediate exponents get a certified bracket instead: an upper bound
by interpolation between the endpoint norms, and a lower bound from a
test-function ensemble (point masses, a Holder-aligned singular vector,
optional random sign vectors).  Reports carry both ends so downstream
checks can choose the safe side.
"""

from dataclasses import dataclass

import numpy as np

from . import multiplier as mult
from .calculus import (apply_spectral, multiplier_kernel, require_finite_speed,
                       spectral_kernel)

N_RANDOM_DEFAULT = 16
FLOOR_REL = 1e-13


def dual_exponent(p):
    if p == 1:
        return np.inf
    if p == np.inf:
        return 1.0
    return p / (p - 1.0)


def lp_norm(values, measure, p):
    """Measure-weighted l^p norm; p = inf is the plain maximum."""
    values = np.asarray(values)
    if p == np.inf:
        return float(np.abs(values).max()) if values.size else 0.0
    if p < 1:
        raise ValueError("norm exponent must be >= 1 (or inf)")
    return float((measure * np.abs(values) ** p).sum() ** (1.0 / p))


def _check_p0(p0):
    if not 1 <= p0 <= 2:
        raise ValueError("p0 must lie in [1, 2]")


@dataclass(frozen=True)
class OperatorNormEstimate:
    """Bracket for an operator norm between weighted L^p spaces."""

    lower: float
    upper: float
    p_in: float
    p_out: float
    exact: bool

    def __post_init__(self):
        if self.lower > self.upper * (1 + 1e-9):
            raise ValueError("norm bracket is inverted; ensemble exceeded "
                             "the interpolation bound")
        object.__setattr__(self, "lower", min(self.lower, self.upper))


def _resolve_sets(space, rows, cols):
    n = space.n_points
    rows = np.arange(n) if rows is None else np.asarray(rows, dtype=np.intp)
    cols = np.arange(n) if cols is None else np.asarray(cols, dtype=np.intp)
    if rows.size == 0 or cols.size == 0:
        raise ValueError("norm over an empty index set")
    return rows, cols


def _ensemble_lower(block, mur, muc, p_in, p_out, col_pnorms, rng, n_random):
    """Best ratio ||T f|| / ||f|| over a small family of probes."""
    # point masses are exact extreme points of the L^1 ball and stay
    # strong probes for p_in near 1
    ratios = muc ** (1.0 - 1.0 / p_in) * col_pnorms
    best = float(ratios.max())

    sym = np.sqrt(mur)[:, None] * block * np.sqrt(muc)
    _, _, vt = np.linalg.svd(sym, full_matrices=False)
    f2 = vt[0] / np.sqrt(muc)
    candidates = [f2]
    for alpha in (2.0 / p_in, (2.0 / p_in) ** 2):
        candidates.append(np.sign(f2) * np.abs(f2) ** alpha)
    if rng is not None:
        signs = rng.choice([-1.0, 1.0], size=(n_random, muc.size))
        candidates.extend(signs)
    for f in candidates:
        denom = lp_norm(f, muc, p_in)
        if denom == 0 or not np.isfinite(denom):
            continue
        tf = block @ (muc * f)
        best = max(best, lp_norm(tf, mur, p_out) / denom)
    return best


def _norm_bracket(kernel, space, p_in, p_out, rows, cols, rng, n_random):
    rows, cols = _resolve_sets(space, rows, cols)
    block = kernel[np.ix_(rows, cols)]
    mur, muc = space.measure[rows], space.measure[cols]
    sym = np.sqrt(mur)[:, None] * block * np.sqrt(muc)
    n22 = float(np.linalg.svd(sym, compute_uv=False)[0]) if sym.size else 0.0

    if p_out == 2:
        col_p = np.sqrt((mur[:, None] * block ** 2).sum(axis=0))
        n_end = float(col_p.max())          # exact 1 -> 2 norm
    else:
        col_p = np.abs(block).max(axis=0)
        n_end = float(col_p.max())          # exact 1 -> inf norm

    if p_in == 1:
        return OperatorNormEstimate(n_end, n_end, 1.0, p_out, True)
    if p_in == 2:
        return OperatorNormEstimate(n22, n22, 2.0, p_out, True)

    theta = 2.0 / p_in - 1.0
    upper = n_end ** theta * n22 ** (1.0 - theta)
    lower = _ensemble_lower(block, mur, muc, p_in, p_out, col_p, rng,
                            n_random)
    return OperatorNormEstimate(lower, upper, p_in, p_out, False)


def op_norm_p_to_2(kernel, space, p0, rows=None, cols=None, rng=None,
                   n_random=N_RANDOM_DEFAULT):
    """Norm of the kernel operator from L^p0(cols) to L^2(rows).

    Exact at p0 in {1, 2}; otherwise a bracket whose upper end comes
    from interpolating the endpoint norms and whose lower end comes
    from test functions.
    """
    _check_p0(p0)
    return _norm_bracket(kernel, space, p0, 2, rows, cols, rng, n_random)


def op_norm_p_to_dual(kernel, space, p0, rows=None, cols=None, rng=None,
                      n_random=N_RANDOM_DEFAULT):
    """Norm from L^p0 to its dual exponent, interpolating (1, inf), (2, 2)."""
    _check_p0(p0)
    return _norm_bracket(kernel, space, p0, dual_exponent(p0), rows, cols,
                         rng, n_random)


# -- restriction-type estimates -------------------------------------------

@dataclass(frozen=True)
class RestrictionRow:
    center: int
    radius: float
    volume: float
    lhs_lower: float
    lhs_upper: float
    rhs_factor: float

    @property
    def ratio_upper(self):
        return self.lhs_upper / self.rhs_factor

    @property
    def ratio_lower(self):
        return self.lhs_lower / self.rhs_factor


@dataclass(frozen=True)
class RestrictionReport:
    """Worst ratio of localized norm to its volume/scale model.

    constant is the max over balls of lhs_upper / rhs_factor, where
    rhs_factor = V(x,r)^(1/2-1/p0) * (R r)^(n(1/p0-1/2)) * |dilated F|_q.
    Balls with r < 1/R fall outside the estimate's range and are
    recorded in ``skipped``.
    """

    rows: list
    constant: float
    dilated_norm: float
    skipped: list


def dilated_line_norm(F, R, q, halfwidth=None, step=mult.DEFAULT_STEP):
    """Grid L^q norm of the unit-scale dilation of F."""
    if R <= 0:
        raise ValueError("dilation scale must be positive")
    line = mult.sample_line(mult.dilate(F, R), halfwidth=halfwidth, step=step)
    return mult.grid_lq_norm(line, q)


def restriction_constant(decomp, F, R, p0, q, balls, dim_n, rng=None,
                         line_halfwidth=None):
    """Test the localized multiplier bound over a family of balls.

    For each ball B(x, r) with r >= 1/R the L^p0 -> L^2 norm of
    F(sqrt(L)) P_B is compared against the model
    V(x, r)^(1/2 - 1/p0) (R r)^(n (1/p0 - 1/2)) ||dilated F||_q.
    """
    _check_p0(p0)
    if dim_n < 0:
        raise ValueError("dimension exponent must be nonnegative")
    dnorm = dilated_line_norm(F, R, q, halfwidth=line_halfwidth)
    if dnorm == 0:
        raise ValueError("dilated symbol norm vanishes; no model to compare")
    kernel = multiplier_kernel(decomp, F)
    space = decomp.space
    rows, skipped = [], []
    for center, r in balls:
        if r < 1.0 / R:
            skipped.append((int(center), float(r)))
            continue
        ball = space.ball_members(center, r)
        est = op_norm_p_to_2(kernel, space, p0, cols=ball, rng=rng)
        vol = space.ball_volume(center, r)
        rhs = (vol ** (0.5 - 1.0 / p0)
               * (R * r) ** (dim_n * (1.0 / p0 - 0.5)) * dnorm)
        rows.append(RestrictionRow(center=int(center), radius=float(r),
                                   volume=vol, lhs_lower=est.lower,
                                   lhs_upper=est.upper, rhs_factor=rhs))
    if not rows:
        raise ValueError("no ball satisfies r >= 1/R; nothing to test")
    constant = max(row.ratio_upper for row in rows)
    return RestrictionReport(rows=rows, constant=constant,
                             dilated_norm=dnorm, skipped=skipped)


@dataclass(frozen=True)
class ConditionReport:
    name: str
    constant: float
    rows: list


def g_condition(decomp, p0, samples, dim_n, rng=None):
    """Localized heat smoothing: e^{-t^2 L} P_B(x,r) against the model
    V(x,r)^(1/2-1/p0) (r/t)^(n(1/p0-1/2)), sampled at (center, r, t)
    triples with r >= t > 0.
    """
    _check_p0(p0)
    space = decomp.space
    rows = []
    for center, r, t in samples:
        if not 0 < t <= r:
            raise ValueError("samples need r >= t > 0")
        kern = spectral_kernel(decomp, np.exp(-t * t * decomp.eigenvalues))
        ball = space.ball_members(center, r)
        est = op_norm_p_to_2(kern, space, p0, cols=ball, rng=rng)
        vol = space.ball_volume(center, r)
        rhs = vol ** (0.5 - 1.0 / p0) * (r / t) ** (dim_n * (1.0 / p0 - 0.5))
        rows.append((int(center), float(r), float(t), est.upper,
                     est.upper / rhs))
    if not rows:
        raise ValueError("no samples given")
    return ConditionReport(name="G", constant=max(r[-1] for r in rows),
                           rows=rows)


def e_condition(decomp, p0, n_power, samples, dim_n, rng=None):
    """Localized resolvent smoothing: (1 + t sqrt(L))^(-N) P_B(x,r)
    against the same model as the heat variant.  Requires
    N > n (1/p0 - 1/2) for the two conditions to be comparable.
    """
    _check_p0(p0)
    if n_power <= dim_n * (1.0 / p0 - 0.5):
        raise ValueError("resolvent power too small for the target "
                         "exponent; raise N above n(1/p0 - 1/2)")
    space = decomp.space
    rows = []
    for center, r, t in samples:
        if not 0 < t <= r:
            raise ValueError("samples need r >= t > 0")
        g = (1.0 + t * decomp.sqrt_eigenvalues) ** (-float(n_power))
        kern = spectral_kernel(decomp, g)
        ball = space.ball_members(center, r)
        est = op_norm_p_to_2(kern, space, p0, cols=ball, rng=rng)
        vol = space.ball_volume(center, r)
        rhs = vol ** (0.5 - 1.0 / p0) * (r / t) ** (dim_n * (1.0 / p0 - 0.5))
        rows.append((int(center), float(r), float(t), est.upper,
                     est.upper / rhs))
    if not rows:
        raise ValueError("no samples given")
    return ConditionReport(name="E", constant=max(r[-1] for r in rows),
                           rows=rows)


# -- spectral measure windows ---------------------------------------------

@dataclass(frozen=True)
class SpectralMeasureSample:
    lam: float
    half_width: float
    count: int
    norm_lower: float
    norm_upper: float


def spectral_measure_norm(decomp, lam, half_width, p0, rng=None):
    """Norm of the smoothed spectral window around lam on the sqrt scale.

    The window averages the projector onto eigenvalues with
    |sqrt(eig) - lam| <= half_width, normalized by the window length
    2 * half_width, and is measured from L^p0 to its dual.  An empty
    window yields zero norm with count 0.
    """
    _check_p0(p0)
    if half_width <= 0:
        raise ValueError("window half width must be positive")
    if lam < 0:
        raise ValueError("spectral position must be nonnegative")
    inside = np.abs(decomp.sqrt_eigenvalues - lam) <= half_width
    count = int(inside.sum())
    if count == 0:
        return SpectralMeasureSample(float(lam), float(half_width), 0,
                                     0.0, 0.0)
    g = inside / (2.0 * half_width)
    kern = spectral_kernel(decomp, g)
    est = op_norm_p_to_dual(kern, decomp.space, p0, rng=rng)
    return SpectralMeasureSample(float(lam), float(half_width), count,
                                 est.lower, est.upper)


def spectral_measure_exponent(decomp, lam_grid, half_width, p0, rng=None):
    """Log-log slope of the window norm across spectral positions."""
    lam_grid = np.asarray(lam_grid, dtype=np.float64)
    if lam_grid.size < 3:
        raise ValueError("need at least 3 spectral positions")
    samples = [spectral_measure_norm(decomp, lam, half_width, p0, rng=rng)
               for lam in lam_grid]
    xs, ys = [], []
    for s in samples:
        if s.count > 0 and s.norm_upper > 0:
            xs.append(np.log(s.lam))
            ys.append(np.log(s.norm_upper))
    if len(xs) < 3:
        raise ValueError("too few nonempty spectral windows for a fit")
    slope = float(np.polyfit(xs, ys, 1)[0])
    return slope, samples


# -- dyadic decay experiments ---------------------------------------------

@dataclass(frozen=True)
class DecayFitReport:
    """Fitted dyadic decay rate with a bootstrap confidence band.

    values[k] is the measured norm at annulus index j_values[k]; the
    slope is per unit j in log2, so a clean 2^(-js) decay shows up as
    fitted_slope ~ -s.  Samples at or below 10x the numerical floor are
    excluded before fitting and counted in n_excluded.
    """

    j_values: np.ndarray
    values: np.ndarray
    fitted_slope: float
    intercept: float
    slope_lo: float
    slope_hi: float
    residual_rms: float
    floor: float
    n_excluded: int


def fit_dyadic_decay(j_values, values, n_boot=200, seed=0):
    """Least-squares slope of log2(values) on j with a bootstrap band."""
    j_values = np.asarray(j_values, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    if j_values.shape != values.shape or j_values.size == 0:
        raise ValueError("mismatched or empty decay samples")
    if np.any(values <= 0):
        raise ValueError("decay samples must be positive")
    floor = FLOOR_REL * float(values.max())
    keep = values > 10.0 * floor
    n_excluded = int((~keep).sum())
    j_used, v_used = j_values[keep], values[keep]
    if j_used.size < 4:
        raise ValueError("fewer than 4 decay samples above the numerical "
                         "floor; widen the annulus range")
    y = np.log2(v_used)
    slope, intercept = np.polyfit(j_used, y, 1)
    resid = y - (slope * j_used + intercept)
    rng = np.random.default_rng(seed)
    boots = []
    for _ in range(n_boot):
        pick = rng.integers(0, j_used.size, size=j_used.size)
        if np.unique(j_used[pick]).size < 2:
            continue
        boots.append(np.polyfit(j_used[pick], y[pick], 1)[0])
    boots = np.sort(boots) if boots else np.array([slope])
    lo = float(np.percentile(boots, 2.5))
    hi = float(np.percentile(boots, 97.5))
    return DecayFitReport(j_values=j_used, values=v_used,
                          fitted_slope=float(slope),
                          intercept=float(intercept), slope_lo=lo,
                          slope_hi=hi,
                          residual_rms=float(np.sqrt(np.mean(resid ** 2))),
                          floor=floor, n_excluded=n_excluded)


def _annuli(space, center, radius, j_list):
    out = []
    for j in j_list:
        members = space.annulus_members(center, radius, j)
        if members.size:
            out.append((j, members))
    return out


def offdiag_decay(decomp, F, center, radius, j_list, p0=1, rng=None,
                  fit_seed=0):
    """Decay of || P_annulus F(sqrt(L)) P_B || across dyadic annuli.

    The ball is B(center, radius); annulus j is 2^(j-1) r < d <= 2^j r.
    Norms are L^p0 -> L^2 (upper end of the bracket when inexact).
    Requires the wave propagator to pass the cone check at the ball
    scale first, since off-diagonal decay presupposes locality.
    """
    _check_p0(p0)
    require_finite_speed(decomp, t=radius)
    space = decomp.space
    ball = space.ball_members(center, radius)
    kernel = multiplier_kernel(decomp, F)
    js, vals = [], []
    for j, members in _annuli(space, center, radius, j_list):
        est = op_norm_p_to_2(kernel, space, p0, rows=members, cols=ball,
                             rng=rng)
        if est.upper > 0:
            js.append(j)
            vals.append(est.upper)
    return fit_dyadic_decay(np.asarray(js), np.asarray(vals), seed=fit_seed)


def criterion_check(decomp, F, M, center, radius, j_list, ensemble=None,
                    rng=None, fit_seed=0):
    """Decay of || F(sqrt(L)) (I - e^{-r^2 L})^M f ||_{L2(annulus j)}.

    f runs over an ensemble supported in the ball (point masses at every
    ball point plus a few random sign vectors); each annulus records the
    worst ratio against ||f||_{L2(mu)}.  The vanishing-at-0 factor makes
    the probe orthogonal to the operator's null space automatically.
    """
    if M < 1 or int(M) != M:
        raise ValueError("smoothing power M must be a positive integer")
    require_finite_speed(decomp, t=radius)
    space = decomp.space
    ball = space.ball_members(center, radius)
    if ball.size == 0:
        raise ValueError("empty base ball")
    g = (F(decomp.sqrt_eigenvalues)
         * (1.0 - np.exp(-radius ** 2 * decomp.eigenvalues)) ** int(M))
    if ensemble is None:
        ensemble = []
        for y in ball:
            f = np.zeros(space.n_points)
            f[y] = 1.0
            ensemble.append(f)
        if rng is not None:
            for _ in range(8):
                f = np.zeros(space.n_points)
                f[ball] = rng.choice([-1.0, 1.0], size=ball.size)
                ensemble.append(f)
    annuli = _annuli(space, center, radius, j_list)
    worst = np.zeros(len(annuli))
    for f in ensemble:
        f = np.asarray(f, dtype=np.float64)
        if np.any(f[np.setdiff1d(np.arange(space.n_points), ball)] != 0):
            raise ValueError("ensemble members must be supported in the ball")
        denom = lp_norm(f, space.measure, 2)
        if denom == 0:
            continue
        u = apply_spectral(decomp, g, f)
        for k, (_, members) in enumerate(annuli):
            val = lp_norm(u[members], space.measure[members], 2) / denom
            worst[k] = max(worst[k], val)
    js = np.asarray([j for j, _ in annuli], dtype=np.float64)
    keep = worst > 0
    return fit_dyadic_decay(js[keep], worst[keep], seed=fit_seed)
