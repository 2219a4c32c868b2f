"""Prototype: final sweep API check with literal cutoff rule."""
import time

import numpy as np

from specmult.calculus import spectral_decompose
from specmult.hardy import riesz_threshold_sweep
from specmult.scenarios import torus1d

t0 = time.time()
families = []
for n in (128, 256, 512):
    space, op = torus1d(n, 2 * np.pi / n)
    families.append((space, spectral_decompose(op)))
print("families built %.1fs" % (time.time() - t0))

rep = riesz_threshold_sweep(families, p=1.0, q=2.0,
                            delta_list=(-0.25, 0.25, 1.0),
                            cutoff_rule=lambda n: (n // 8, n // 4),
                            seed=0)
print("sweep done %.1fs" % (time.time() - t0))
for delta in (-0.25, 0.25, 1.0):
    cuts, prof = rep.profile(delta)
    print("delta %+.2f verdict %-12s cutoffs %s profile %s dup %s" % (
        delta, rep.verdicts[delta], cuts.tolist(),
        ["%.3f" % v for v in prof],
        {int(c): "%.3f" % s for c, s in rep.duplicates(delta).items()}))
