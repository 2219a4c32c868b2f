"""Finite metric measure spaces.

A space is a finite point set carrying a distance matrix and a positive
measure vector.  Balls are closed: ``B(x, r) = {y : d(x, y) <= r}``.
Volumes are measure sums over closed balls, so ``V(x, r)`` is
nondecreasing in ``r`` and always at least ``mu(x)``.
"""

import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra

_TRIANGLE_SAMPLE = 4096


@dataclass(frozen=True)
class WeightedPoints:
    """Point set with a measure but no metric.

    Carrier for operators at scales where an N x N distance matrix
    cannot exist; everything metric (balls, cones, square functions)
    is unavailable, but measure-symmetric operators and polynomial
    filtering work unchanged.
    """

    measure: np.ndarray
    label: str = ""

    def __post_init__(self):
        mu = np.ascontiguousarray(self.measure, dtype=np.float64)
        if mu.ndim != 1 or mu.size == 0:
            raise ValueError("measure must be a nonempty vector")
        if not np.all(np.isfinite(mu)) or np.any(mu <= 0):
            raise ValueError("measure must be finite and positive")
        mu.setflags(write=False)
        object.__setattr__(self, "measure", mu)

    @property
    def n_points(self):
        return self.measure.shape[0]


@dataclass(frozen=True)
class MetricMeasureSpace:
    """Point set with pairwise distances and a positive measure.

    Parameters
    ----------
    distance : (N, N) ndarray
        Symmetric, nonnegative, zero diagonal.  Checked on construction,
        including the triangle inequality on a deterministic sample of
        triples (all triples when N is small).
    measure : (N,) ndarray
        Strictly positive weights.
    label : str
        Free-form description used in reports.
    """

    distance: np.ndarray
    measure: np.ndarray
    label: str = ""

    def __post_init__(self):
        d = np.ascontiguousarray(self.distance, dtype=np.float64)
        mu = np.ascontiguousarray(self.measure, dtype=np.float64)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise ValueError("distance must be a square matrix")
        n = d.shape[0]
        if n < 1:
            raise ValueError("space needs at least one point")
        if mu.shape != (n,):
            raise ValueError("measure length %d does not match %d points"
                             % (mu.shape[0], n))
        if not np.all(np.isfinite(d)):
            raise ValueError("distance entries must be finite")
        if np.any(d < 0):
            raise ValueError("distance entries must be nonnegative")
        if np.any(np.diag(d) != 0):
            raise ValueError("distance diagonal must be zero")
        if not np.allclose(d, d.T, rtol=0, atol=1e-12 * max(1.0, d.max())):
            raise ValueError("distance matrix must be symmetric")
        if not np.all(np.isfinite(mu)) or np.any(mu <= 0):
            raise ValueError("measure must be strictly positive and finite")
        _check_triangle(d)
        d.setflags(write=False)
        mu.setflags(write=False)
        object.__setattr__(self, "distance", d)
        object.__setattr__(self, "measure", mu)

    @property
    def n_points(self):
        return self.distance.shape[0]

    @cached_property
    def diameter(self):
        return float(self.distance.max())

    @cached_property
    def min_spacing(self):
        """Smallest nonzero distance, or 0.0 for a single point."""
        d = self.distance[self.distance > 0]
        return float(d.min()) if d.size else 0.0

    @cached_property
    def total_mass(self):
        return float(self.measure.sum())

    @cached_property
    def distance_order(self):
        """Per-row argsort of the distance matrix (stable)."""
        return np.argsort(self.distance, axis=1, kind="stable")

    @cached_property
    def sorted_distance(self):
        return np.take_along_axis(self.distance, self.distance_order, axis=1)

    def ball_members(self, center, radius):
        """Indices of the closed ball around point index ``center``."""
        if radius < 0:
            raise ValueError("radius must be nonnegative")
        return np.flatnonzero(self.distance[center] <= radius)

    def ball_volume(self, center, radius):
        return float(self.measure[self.ball_members(center, radius)].sum())

    def annulus_members(self, center, radius, j):
        """Indices of the dyadic annulus 2^(j-1) r < d <= 2^j r, j >= 1.

        For j = 0 this returns the closed ball of radius r itself, the
        innermost piece of the dyadic decomposition.
        """
        if j < 0:
            raise ValueError("annulus index must be nonnegative")
        if radius <= 0:
            raise ValueError("annulus needs a positive base radius")
        d = self.distance[center]
        if j == 0:
            return np.flatnonzero(d <= radius)
        lo, hi = 2.0 ** (j - 1) * radius, 2.0 ** j * radius
        return np.flatnonzero((d > lo) & (d <= hi))


def _check_triangle(d):
    n = d.shape[0]
    if n <= 64:
        # full check is cheap here
        viol = d[:, :, None] + d[None, :, :] - d[:, None, :]
        if viol.min() < -1e-9 * max(1.0, d.max()):
            raise ValueError("triangle inequality violated")
        return
    rng = np.random.default_rng(0)
    ijk = rng.integers(0, n, size=(_TRIANGLE_SAMPLE, 3))
    i, j, k = ijk.T
    if np.min(d[i, j] + d[j, k] - d[i, k]) < -1e-9 * max(1.0, d.max()):
        raise ValueError("triangle inequality violated on sampled triples")


def build_grid_space(dim, side, spacing=1.0, topology="torus"):
    """Uniform grid with counting-type measure mu = spacing^dim.

    dim 1 or 2; ``side`` points per axis; topology "torus" wraps each
    axis, "interval" does not.  Distances are graph geodesics, which on
    these grids is the (wrapped) L1 metric.
    """
    if dim not in (1, 2):
        raise ValueError("grid dimension must be 1 or 2")
    if side < 2:
        raise ValueError("grid needs at least 2 points per axis")
    if spacing <= 0:
        raise ValueError("grid spacing must be positive")
    if topology not in ("torus", "interval"):
        raise ValueError("topology must be 'torus' or 'interval'")
    if side * spacing > 1e12:
        raise ValueError("grid extent overflows distance precision")
    idx = np.arange(side)
    diff = np.abs(idx[:, None] - idx[None, :])
    if topology == "torus":
        diff = np.minimum(diff, side - diff)
    axis_d = spacing * diff
    if dim == 1:
        dist = axis_d
        n = side
    else:
        dist = (axis_d[:, None, :, None] + axis_d[None, :, None, :])
        n = side * side
        dist = dist.reshape(n, n)
    mu = np.full(n, spacing ** dim)
    return MetricMeasureSpace(dist, mu, label="%dd %s side=%d h=%g"
                              % (dim, topology, side, spacing))


def from_graph_file(path, measure_path=None):
    """Load a space from an edge-list file.

    Format: first non-comment line is the point count N, then one edge
    per line as ``i j w`` with 0-based endpoints and positive length w.
    Distances are shortest-path lengths; the graph must be connected.
    The measure file, when given, holds one positive weight per line;
    without it every point gets weight 1 and a warning is emitted.
    """
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if line:
                rows.append(line.split())
    if not rows:
        raise ValueError("empty graph file: %s" % path)
    if len(rows[0]) != 1:
        raise ValueError("graph file must open with the point count")
    n = int(rows[0][0])
    if n < 1:
        raise ValueError("graph file declares no points")
    ii, jj, ww = [], [], []
    for r in rows[1:]:
        if len(r) != 3:
            raise ValueError("edge lines must be 'i j w', got %r" % (r,))
        i, j, w = int(r[0]), int(r[1]), float(r[2])
        if not (0 <= i < n and 0 <= j < n):
            raise ValueError("edge endpoint out of range: %d %d" % (i, j))
        if w <= 0 or not np.isfinite(w):
            raise ValueError("edge weight must be positive and finite")
        ii.append(i)
        jj.append(j)
        ww.append(w)
    adj = coo_matrix((ww + ww, (ii + jj, jj + ii)), shape=(n, n)).tocsr()
    dist = dijkstra(adj, directed=False)
    if not np.all(np.isfinite(dist)):
        raise ValueError("graph is not connected")
    if measure_path is None:
        warnings.warn("no measure file given, defaulting to unit weights")
        mu = np.ones(n)
    else:
        mu = np.loadtxt(measure_path, dtype=np.float64, ndmin=1)
        if mu.shape != (n,):
            raise ValueError("measure file length %d does not match %d points"
                             % (mu.shape[0], n))
    return MetricMeasureSpace(dist, mu, label="graph %s" % path)


@dataclass(frozen=True)
class DoublingFit:
    """Result of fitting V(x, lam*r) <= C * lam^n * V(x, r) on samples.

    ``dimension_n`` is the smallest exponent on the search grid whose
    per-dilation worst ratios stay flat (within the growth slack) as the
    dilation factor increases; ``constant_C`` is the worst ratio at that
    exponent, and ``residual`` is the growth exponent left unabsorbed.
    """

    dimension_n: float
    constant_C: float
    residual: float
    samples: int = field(default=0, compare=False)


def fit_doubling_dimension(space, centers=None, radius_grid=None,
                           lambda_grid=None, slack=0.25, n_step=0.05,
                           n_max=8.0):
    """Estimate the volume-doubling exponent from sampled ball volumes.

    The candidate exponents n run over a uniform grid; for each, the
    worst ratio V(x, lam*r) / (lam^n V(x, r)) is computed per dilation
    factor lam, and n is accepted as soon as that worst ratio no longer
    grows (by more than ``slack`` as a fraction) from the smallest to
    the largest lam.  Dilation factors must be >= 1 and increasing.
    """
    if space.n_points < 2:
        raise ValueError("doubling fit needs at least 2 points")
    if centers is None:
        step = max(1, space.n_points // 32)
        centers = np.arange(0, space.n_points, step)
    centers = np.asarray(centers, dtype=np.intp)
    if radius_grid is None:
        lo = space.min_spacing
        hi = space.diameter / 4
        if hi <= lo:
            hi = 2 * lo
        radius_grid = np.geomspace(lo, hi, 6)
    radius_grid = np.asarray(radius_grid, dtype=np.float64)
    if lambda_grid is None:
        lambda_grid = np.array([2.0, 4.0, 8.0, 16.0])
    lambda_grid = np.asarray(lambda_grid, dtype=np.float64)
    if radius_grid.size == 0 or lambda_grid.size == 0 or centers.size == 0:
        raise ValueError("doubling fit needs nonempty sample grids")
    if np.any(lambda_grid < 1) or np.any(np.diff(lambda_grid) <= 0):
        raise ValueError("dilation grid must be increasing and >= 1")

    # volume table: rows (center, r) for r and each lam*r
    d = space.distance[centers]
    mu = space.measure

    def volumes(radii):
        # (centers, radii) closed-ball volumes in one pass
        inside = d[:, :, None] <= radii[None, None, :]
        return np.einsum("ijr,j->ir", inside, mu)

    v_base = volumes(radius_grid)
    if np.any(v_base <= 0):
        raise ValueError("sampled ball with zero volume")
    v_dil = [volumes(lam * radius_grid) for lam in lambda_grid]

    n_grid = np.arange(0.0, n_max + 1e-9, n_step)
    worst = np.empty((n_grid.size, lambda_grid.size))
    for a, lam in enumerate(lambda_grid):
        ratio = v_dil[a] / v_base
        worst[:, a] = ratio.max() / lam ** n_grid
    growth = worst[:, -1] / worst[:, 0]
    ok = np.flatnonzero(growth <= 1.0 + slack)
    if ok.size == 0:
        raise ValueError("no exponent on the grid tames volume growth; "
                         "raise n_max or loosen the sample grids")
    pick = int(ok[0])
    n_star = float(n_grid[pick])
    c_star = max(1.0, float(worst[pick].max()))
    span = np.log(lambda_grid[-1] / lambda_grid[0])
    residual = float(np.log(max(growth[pick], 1.0)) / span)
    return DoublingFit(dimension_n=n_star, constant_C=c_star,
                       residual=residual,
                       samples=centers.size * radius_grid.size)
