"""Prototype: criterion 5 residual vs spacing and ball radius."""
import numpy as np

from specmult import multiplier as mult
from specmult.calculus import spectral_decompose
from specmult.estimates import offdiag_decay
from specmult.scenarios import torus1d

for h in (0.25, 0.5, 1.0):
    space, op = torus1d(512, h)
    dec = spectral_decompose(op)
    for r in (0.5, 1.0, 2.0, 4.0):
        line = "h=%4g r=%3g:" % (h, r)
        for delta in (2.0, 4.0):
            F = mult.bochner_riesz(1.0, delta)
            try:
                fit = offdiag_decay(dec, F, center=0, radius=r,
                                    j_list=range(2, 7))
                line += "  d%g: slope %+.2f resid %.3f n%d" % (
                    delta, fit.fitted_slope, fit.residual_rms,
                    fit.j_values.size)
            except ValueError:
                line += "  d%g: floor" % delta
        print(line)
