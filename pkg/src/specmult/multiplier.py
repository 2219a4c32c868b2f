"""Spectral multipliers and their smoothness norms.

A multiplier is a scalar symbol F on the nonnegative half-line; applied
through the functional calculus it becomes the operator F(sqrt(L)).
This module provides the standard symbol families, dilation, a dyadic
partition of unity, and grid-based Fourier analysis of symbols: the
transform, frequency filtering, and Sobolev / Besov norms used by the
estimate checks.

Conventions.  Symbols are extended evenly to the whole line before any
Fourier step, and line norms are taken over the full line; for an even
function this differs from the half-line value by a fixed factor that
is absorbed into constants.  Frequency grids come from zero-padded FFTs
(default padding 4x) and q = inf norms are grid maxima.
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

DEFAULT_PAD = 4
DEFAULT_STEP = 1.0 / 512
BOUNDARY_FRACTION = 0.1
BOUNDARY_TOL = 1e-3


@dataclass(frozen=True)
class Multiplier:
    """Scalar symbol on [0, inf) with an optional known support radius."""

    fn: Callable[[np.ndarray], np.ndarray]
    label: str = ""
    support_radius: Optional[float] = None

    def __call__(self, lam):
        lam = np.asarray(lam, dtype=np.float64)
        if np.any(lam < 0):
            raise ValueError("multiplier argument must be nonnegative")
        out = np.asarray(self.fn(lam), dtype=np.float64)
        if out.shape != lam.shape:
            out = np.broadcast_to(out, lam.shape).copy()
        return out


def constant(value=1.0):
    return Multiplier(lambda lam: np.full_like(lam, float(value)),
                      label="const %g" % value, support_radius=None)


def indicator(R=1.0):
    """Sharp spectral cutoff 1_{[0, R]}."""
    if R <= 0:
        raise ValueError("cutoff radius must be positive")
    return Multiplier(lambda lam: (lam <= R).astype(np.float64),
                      label="indicator R=%g" % R, support_radius=float(R))


def bochner_riesz(R, delta):
    """(1 - lam^2 / R^2)_+^delta.

    At the edge lam = R the factor is 0, so the power is 0 for delta > 0
    and 1 for delta = 0 (sharp cutoff).  Negative delta keeps the same
    truncation (value 0 at and beyond the edge): the symbol blows up
    like a negative power approaching the edge but stays finite on any
    eigenvalue grid that misses lam = R exactly.  delta <= -1 is
    rejected: the symbol would not be locally integrable at the edge.
    """
    if R <= 0:
        raise ValueError("cutoff radius must be positive")
    if delta <= -1:
        raise ValueError("edge exponent must exceed -1")

    def fn(lam):
        base = 1.0 - (lam / R) ** 2
        inside = base > 0
        out = np.zeros_like(lam)
        if delta == 0:
            out[lam <= R] = 1.0
        else:
            out[inside] = base[inside] ** delta
        return out

    return Multiplier(fn, label="bochner_riesz R=%g delta=%g" % (R, delta),
                      support_radius=float(R))


def gaussian(width=1.0):
    """exp(-(lam / width)^2)."""
    if width <= 0:
        raise ValueError("width must be positive")
    return Multiplier(lambda lam: np.exp(-(lam / width) ** 2),
                      label="gaussian w=%g" % width, support_radius=None)


def sinc(rho):
    """sin(rho * lam) / (rho * lam), value 1 at lam = 0.

    Its even extension has Fourier transform supported in [-rho, rho],
    which makes it the canonical probe for propagation-speed checks.
    """
    if rho <= 0:
        raise ValueError("sinc scale must be positive")
    return Multiplier(lambda lam: np.sinc(rho * lam / np.pi),
                      label="sinc rho=%g" % rho, support_radius=None)


def from_table(path):
    """Piecewise-linear symbol from a two-column file (lam, value).

    Abscissae must be nonnegative and strictly increasing; the symbol is
    0 outside the tabulated range unless the table starts at lam = 0, in
    which case the first value extends to the left edge.
    """
    tab = np.loadtxt(path, dtype=np.float64, ndmin=2)
    if tab.ndim != 2 or tab.shape[1] != 2 or tab.shape[0] < 2:
        raise ValueError("table file needs two columns and >= 2 rows")
    lam_t, val_t = tab[:, 0], tab[:, 1]
    if lam_t[0] < 0 or np.any(np.diff(lam_t) <= 0):
        raise ValueError("table abscissae must be >= 0 and increasing")
    if not np.all(np.isfinite(val_t)):
        raise ValueError("table values must be finite")

    def fn(lam):
        return np.interp(lam, lam_t, val_t, left=val_t[0], right=0.0)

    return Multiplier(fn, label="table %s" % path,
                      support_radius=float(lam_t[-1]))


def dilate(F, R):
    """The dilated symbol lam -> F(R * lam)."""
    if R <= 0:
        raise ValueError("dilation factor must be positive")
    sup = None if F.support_radius is None else F.support_radius / R
    return Multiplier(lambda lam: F(R * lam),
                      label="dilate(%s, %g)" % (F.label, R),
                      support_radius=sup)


# -- dyadic partition of unity on (0, inf) --------------------------------

def _bump(lam):
    # smooth bump supported on (1/4, 1)
    out = np.zeros_like(lam)
    inside = (lam > 0.25) & (lam < 1.0)
    x = lam[inside]
    out[inside] = np.exp(1.0 / ((x - 0.25) * (x - 1.0)))
    return out


def _bump_sum(lam):
    # sum of _bump(2^-k lam) over all k; at most two terms are nonzero
    out = np.zeros_like(lam)
    pos = lam > 0
    x = lam[pos]
    k_hi = np.ceil(np.log2(x))          # smallest k with 2^-k x <= 1
    acc = np.zeros_like(x)
    for k_off in (0, 1):
        acc += _bump(x / 2.0 ** (k_hi + k_off))
    out[pos] = acc
    return out


def dyadic_window(j):
    """Normalized window supported on (2^(j-2), 2^j).

    The family over all integers j sums to exactly 1 at every lam > 0
    because the normalizer shares the dilation structure of the bump.
    """

    def fn(lam):
        out = np.zeros_like(lam)
        pos = lam > 0
        x = lam[pos]
        num = _bump(x / 2.0 ** j)
        den = _bump_sum(x)
        out[pos] = np.where(num > 0, num / np.maximum(den, 1e-300), 0.0)
        return out

    return Multiplier(fn, label="dyadic j=%d" % j,
                      support_radius=float(2.0 ** j))


def dyadic_partition(j_min, j_max):
    """Windows j_min..j_max plus closure against a reference grid.

    Returns the list of windows; ``partition_defect`` measures how far
    their sum is from 1 on a grid confined to the covered band.
    """
    if j_max < j_min:
        raise ValueError("empty window range")
    return [dyadic_window(j) for j in range(j_min, j_max + 1)]


def partition_defect(windows, grid):
    grid = np.asarray(grid, dtype=np.float64)
    if np.any(grid <= 0):
        raise ValueError("partition defect is defined on positive lam")
    total = sum(w(grid) for w in windows)
    return float(np.abs(total - 1.0).max())


# -- line functions and Fourier machinery ---------------------------------

@dataclass(frozen=True)
class LineFunction:
    """Real samples on a uniform symmetric grid containing 0."""

    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        g = np.ascontiguousarray(self.grid, dtype=np.float64)
        v = np.ascontiguousarray(self.values, dtype=np.float64)
        if g.ndim != 1 or g.shape != v.shape or g.size < 3:
            raise ValueError("line function needs matching 1d arrays, >= 3 points")
        if g.size % 2 != 1:
            raise ValueError("line grid must have odd length")
        steps = np.diff(g)
        if np.any(steps <= 0) or not np.allclose(steps, steps[0],
                                                 rtol=1e-9, atol=0):
            raise ValueError("line grid must be uniform and increasing")
        if abs(g[g.size // 2]) > 1e-9 * max(1.0, abs(g[-1])):
            raise ValueError("line grid must be centered at 0")
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "values", v)

    @property
    def step(self):
        return float(self.grid[1] - self.grid[0])

    @property
    def halfwidth(self):
        return float(self.grid[-1])


def sample_line(F, halfwidth=None, step=DEFAULT_STEP):
    """Even extension of a multiplier sampled on [-halfwidth, halfwidth]."""
    if halfwidth is None:
        if F.support_radius is None:
            raise ValueError("halfwidth required for unbounded symbols")
        halfwidth = 1.25 * F.support_radius
    m = int(np.ceil(halfwidth / step))
    if m < 1:
        raise ValueError("halfwidth must exceed the step")
    x = step * np.arange(-m, m + 1)
    return LineFunction(x, F(np.abs(x)))


def _padded_fft(line, pad_factor):
    if pad_factor < 1:
        raise ValueError("pad factor must be >= 1")
    n = line.grid.size
    p = 1
    while p < pad_factor * n:
        p *= 2
    u = np.zeros(p)
    u[:n] = line.values
    return np.fft.fft(u), p


def fourier_transform(line, pad_factor=DEFAULT_PAD):
    """Continuum-normalized transform on a symmetric frequency grid.

    Uses the quadrature F(xi) = step * sum f(x_j) exp(-i xi x_j) over a
    zero-padded FFT; the most negative frequency bin is dropped so the
    output grid is symmetric.  For an even input the output is real up
    to rounding, and the real part is returned.
    """
    w, p = _padded_fft(line, pad_factor)
    m = line.grid.size // 2
    step = line.step
    k = np.arange(p)
    phase = np.exp(2j * np.pi * k * m / p)
    spec = step * phase * w
    xi = 2 * np.pi * np.fft.fftfreq(p, d=step)
    order = np.fft.fftshift(np.arange(p))
    xi_s, spec_s = xi[order], spec[order]
    # drop the unpaired most-negative bin
    return LineFunction(xi_s[1:], spec_s[1:].real)


def plancherel_defect(line, pad_factor=DEFAULT_PAD):
    """Relative gap between step*sum|f|^2 and its frequency-side value."""
    w, p = _padded_fft(line, pad_factor)
    time_side = line.step * np.sum(line.values ** 2)
    dxi = 2 * np.pi / (p * line.step)
    freq_side = dxi / (2 * np.pi) * np.sum(np.abs(line.step * w) ** 2)
    return abs(time_side - freq_side) / max(time_side, 1e-300)


def frequency_filter(line, weight, pad_factor=DEFAULT_PAD):
    """Apply a frequency-side weight and come back to the x grid.

    ``weight`` maps an array of frequencies xi to multiplicative
    factors.  The returned samples live on the padded grid's first
    cycle, restricted to the original x positions.
    """
    w, p = _padded_fft(line, pad_factor)
    m = line.grid.size // 2
    step = line.step
    k = np.arange(p)
    xi = 2 * np.pi * np.fft.fftfreq(p, d=step)
    wmod = w * np.asarray(weight(xi), dtype=np.float64)
    g = np.fft.ifft(wmod)
    vals = g[:line.grid.size].real
    return LineFunction(line.grid, vals)


def nyquist_frequency(line):
    return np.pi / line.step


def grid_lq_norm(line, q):
    """L^q norm of the samples; q = inf gives the grid maximum."""
    if q == np.inf:
        return float(np.abs(line.values).max())
    if q < 1:
        raise ValueError("norm exponent must be >= 1 (or inf)")
    return float((line.step * np.sum(np.abs(line.values) ** q)) ** (1.0 / q))


def _check_boundary_mass(line):
    n = line.grid.size
    edge = max(1, int(BOUNDARY_FRACTION * n))
    peak = np.abs(line.values).max()
    if peak == 0:
        return
    border = max(np.abs(line.values[:edge]).max(),
                 np.abs(line.values[-edge:]).max())
    if border > BOUNDARY_TOL * peak:
        raise ValueError("heavy mass at the grid boundary; enlarge the "
                         "window or cut off the symbol first")


def sobolev_norm(line, s, q, literal_l2=False, pad_factor=DEFAULT_PAD):
    """Smoothness norm of order s with integrability exponent q.

    The samples are pushed through the frequency weight
    (1 + xi^2)^(s/2) and the result is measured in L^q on the grid.
    Two conventions circulate for mixed-exponent smoothness conditions:
    some statements pair the exponent q with a square integral on the
    right-hand side.  ``literal_l2=True`` reproduces that variant by
    taking the L^2 grid norm of the weighted function regardless of q.
    """
    if s < 0:
        raise ValueError("smoothness order must be nonnegative")
    _check_boundary_mass(line)
    weighted = frequency_filter(line, lambda xi: (1.0 + xi ** 2) ** (s / 2.0),
                                pad_factor)
    return grid_lq_norm(weighted, 2 if literal_l2 else q)


def _smoothstep(u):
    # C^inf rise from 0 at u <= 0 to 1 at u >= 1
    u = np.clip(u, 0.0, 1.0)
    a = np.zeros_like(u)
    b = np.zeros_like(u)
    pos = u > 0
    a[pos] = np.exp(-1.0 / u[pos])
    neg = u < 1
    b[neg] = np.exp(-1.0 / (1.0 - u[neg]))
    return a / (a + b)


def _freq_window(k):
    # telescoping Littlewood-Paley family: k = 0 is the low-pass piece
    def low(xi):
        return 1.0 - _smoothstep(np.abs(xi) - 1.0)

    if k == 0:
        return low

    def win(xi):
        r = np.abs(xi)
        return _smoothstep(r / 2.0 ** (k - 1) - 1.0) - \
            _smoothstep(r / 2.0 ** k - 1.0)

    return win


@dataclass(frozen=True)
class BesovBlocks:
    """Per-block contributions 2^(ks) ||window_k part||_q and their sum."""

    ks: np.ndarray
    terms: np.ndarray
    total: float
    tail_estimate: float


def besov_blocks(line, s, q, pad_factor=DEFAULT_PAD):
    """Frequency-block decomposition behind the Besov norm.

    Block k lives on frequencies |xi| in [2^(k-1), 2^(k+1)] (k = 0 is
    the low-pass piece).  Blocks are included while they intersect the
    grid's Nyquist band; the last included term doubles as a crude tail
    estimate, since beyond Nyquist the sampled spectrum carries nothing.
    """
    _check_boundary_mass(line)
    nyq = nyquist_frequency(line)
    k_max = max(1, int(np.ceil(np.log2(nyq))) + 1)
    ks, terms = [], []
    for k in range(0, k_max + 1):
        piece = frequency_filter(line, _freq_window(k), pad_factor)
        ks.append(k)
        terms.append(2.0 ** (k * s) * grid_lq_norm(piece, q))
    ks = np.asarray(ks)
    terms = np.asarray(terms)
    return BesovBlocks(ks=ks, terms=terms, total=float(terms.sum()),
                       tail_estimate=float(terms[-1]))


def besov_norm(line, s, q, pad_factor=DEFAULT_PAD):
    """Besov norm with summation exponent 1: sum_k 2^(ks) ||piece_k||_q."""
    return besov_blocks(line, s, q, pad_factor).total


def sup_dilated_norm(F, s, q, t_grid, window=None, norm="sobolev",
                     step=DEFAULT_STEP, literal_l2=False):
    """sup over t of the smoothness norm of window * (dilated F).

    This is the scale-invariant quantity controlling multiplier
    theorems: the symbol is dilated to unit scale, localized by the
    window (default: the normalized dyadic bump at j = 0, supported on
    (1/4, 1)), and measured in the requested norm.
    """
    t_grid = np.asarray(t_grid, dtype=np.float64)
    if t_grid.size == 0 or np.any(t_grid <= 0):
        raise ValueError("dilation grid must be positive and nonempty")
    if window is None:
        window = dyadic_window(0)
    if window.support_radius is None:
        raise ValueError("window must have bounded support")
    hw = 1.25 * window.support_radius
    best = 0.0
    for t in t_grid:
        dil = dilate(F, t)
        prod = Multiplier(lambda lam, d=dil: window(lam) * d(lam),
                          support_radius=window.support_radius)
        line = sample_line(prod, halfwidth=hw, step=step)
        if norm == "sobolev":
            val = sobolev_norm(line, s, q, literal_l2=literal_l2)
        elif norm == "besov":
            val = besov_norm(line, s, q)
        else:
            raise ValueError("norm must be 'sobolev' or 'besov'")
        best = max(best, val)
    return best
