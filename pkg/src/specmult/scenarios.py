"""Named operator scenarios.

Each builder returns a (space, operator) pair ready for decomposition.
Grid Laplacians use the standard second-difference stencils scaled by
1 / spacing^2, so the sqrt-spectrum band top is 2 / spacing in one
dimension and group velocities never exceed 1 in length units.
"""

import numpy as np
import scipy.sparse as sp

from .calculus import SelfAdjointOperator
from .space import (MetricMeasureSpace, WeightedPoints, build_grid_space,
                    from_graph_file)


def _ring_matrix(n, spacing):
    main = np.full(n, 2.0)
    off = np.full(n - 1, -1.0)
    a = sp.diags([off, main, off], [-1, 0, 1], format="lil")
    a[0, n - 1] = -1.0
    a[n - 1, 0] = -1.0
    return (a / spacing ** 2).tocsr()


def torus1d(side=128, spacing=1.0):
    """Second-difference Laplacian on a 1d periodic grid."""
    space = build_grid_space(1, side, spacing, "torus")
    return space, SelfAdjointOperator(_ring_matrix(side, spacing), space)


def torus1d_operator(side, spacing=1.0):
    """The periodic grid operator alone, on a metric-free carrier.

    Storing pairwise distances needs side^2 memory, so the full space
    construction stops being possible around a few thousand points.
    Large polynomial-filtering runs only touch the matrix and the
    measure; this builder serves those.
    """
    points = WeightedPoints(np.full(side, float(spacing)),
                            label="ring n=%d (no metric)" % side)
    return SelfAdjointOperator(_ring_matrix(side, spacing), points)


def torus2d(side=16, spacing=1.0):
    """Five-point Laplacian on a 2d periodic grid."""
    space = build_grid_space(2, side, spacing, "torus")
    ring = sp.lil_matrix((side, side))
    for i in range(side):
        ring[i, (i + 1) % side] = 1.0
        ring[i, (i - 1) % side] = 1.0
    ring = ring.tocsr()
    eye = sp.identity(side, format="csr")
    adj = sp.kron(ring, eye) + sp.kron(eye, ring)
    a = (4.0 * sp.identity(side * side) - adj) / spacing ** 2
    return space, SelfAdjointOperator(a.tocsr(), space)


def interval_dirichlet(side=128, spacing=1.0):
    """Second-difference Laplacian on a segment with absorbing ends.

    Grid points sit at spacing * (1 .. side) with walls one spacing
    outside both ends; the operator is strictly positive.
    """
    space = build_grid_space(1, side, spacing, "interval")
    main = np.full(side, 2.0)
    off = np.full(side - 1, -1.0)
    a = sp.diags([off, main, off], [-1, 0, 1], format="csr") / spacing ** 2
    return space, SelfAdjointOperator(a, space)


def inverse_square(side=128, spacing=1.0, c=0.0):
    """Dirichlet segment Laplacian plus a c / x^2 potential.

    x is the distance to the wall just left of the grid, so the first
    point sits one spacing away from the singularity.  The quadratic
    form stays nonnegative exactly when c >= -1/4 (the discrete Hardy
    inequality has the same constant as the half-line one); smaller c
    is refused.
    """
    if c < -0.25:
        raise ValueError("potential strength below -1/4 makes the "
                         "operator unbounded from below")
    space = build_grid_space(1, side, spacing, "interval")
    x = spacing * np.arange(1, side + 1)
    main = 2.0 / spacing ** 2 + c / x ** 2
    off = np.full(side - 1, -1.0 / spacing ** 2)
    a = sp.diags([off, main, off], [-1, 0, 1], format="csr")
    return space, SelfAdjointOperator(a, space)


def graph_file(path, measure_path=None):
    """Space from an edge list; operator is the weighted graph Laplacian.

    Edge lengths define the metric through shortest paths; couplings
    are reciprocal lengths, divided by the point measure so that the
    operator is symmetric in the measure inner product.
    """
    space = from_graph_file(path, measure_path)
    n = space.n_points
    rows, cols, vals = [], [], []
    with open(path) as fh:
        lines = [ln.split("#", 1)[0].strip() for ln in fh]
    lines = [ln for ln in lines if ln]
    for ln in lines[1:]:
        i, j, w = ln.split()
        i, j, w = int(i), int(j), float(w)
        rows.extend((i, j))
        cols.extend((j, i))
        vals.extend((1.0 / w, 1.0 / w))
    coupling = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    deg = np.asarray(coupling.sum(axis=1)).ravel()
    lap = sp.diags(deg) - coupling
    a = sp.diags(1.0 / space.measure) @ lap
    return space, SelfAdjointOperator(a.tocsr(), space)


def equal_distance(side=16, gap=1.0):
    """All points mutually at the same distance; complete-graph operator.

    Degenerate reference scenario: zero doubling exponent and a two-value
    spectrum.
    """
    if side < 2:
        raise ValueError("need at least 2 points")
    dist = gap * (np.ones((side, side)) - np.eye(side))
    space = MetricMeasureSpace(dist, np.ones(side), label="equal distance")
    a = (side * np.eye(side) - np.ones((side, side))) / gap ** 2
    return space, SelfAdjointOperator(a, space)


SCENARIOS = {
    "torus1d": (torus1d, "side, spacing: periodic 1d grid Laplacian"),
    "torus2d": (torus2d, "side, spacing: periodic 2d grid Laplacian "
                         "(side^2 points)"),
    "interval_dirichlet": (interval_dirichlet,
                           "side, spacing: absorbing segment Laplacian"),
    "inverse_square": (inverse_square,
                       "side, spacing, c: segment Laplacian with c/x^2 "
                       "potential, c >= -1/4"),
    "graph_file": (graph_file,
                   "path, measure_path: metric and Laplacian from an "
                   "edge-list file"),
}

# equal_distance stays importable as a degenerate reference but is not a
# catalog scenario: it exists to exercise edge cases, not experiments.


def build_scenario(name, **params):
    if name not in SCENARIOS:
        raise ValueError("unknown scenario %r; known: %s"
                         % (name, ", ".join(sorted(SCENARIOS))))
    builder, _ = SCENARIOS[name]
    return builder(**params)


def list_scenarios():
    return [(name, doc) for name, (_, doc) in sorted(SCENARIOS.items())]
