"""Prototype: corrected criteria 5/6, the threshold sweep, and norms."""
import time

import numpy as np

from specmult import multiplier as mult
from specmult.calculus import spectral_decompose
from specmult.estimates import offdiag_decay, criterion_check
from specmult.hardy import riesz_threshold_sweep, cone_plan, hardy_operator_ratio, default_ensemble
from specmult.scenarios import torus1d

space, op = torus1d(512, 0.25)
dec = spectral_decompose(op)

# --- criterion 5 corrected: R=1, r=1, j=2..6
for delta in (2.0, 4.0):
    F = mult.bochner_riesz(1.0, delta)
    fit = offdiag_decay(dec, F, center=0, radius=1.0, j_list=range(2, 7))
    print("offdiag R=1 r=1 delta=%g: slope %.3f [%.3f, %.3f] resid %.3f vals %s"
          % (delta, fit.fitted_slope, fit.slope_lo, fit.slope_hi,
             fit.residual_rms, np.array2string(fit.values, precision=2)))

# --- criterion 6 corrected: BR delta=2, M=2, atom ensemble (mean-zero in B)
ball = space.ball_members(0, 1.0)
rng = np.random.default_rng(7)
ens = []
mu = space.measure
for y in ball:
    f = np.zeros(space.n_points)
    f[y] = 1.0
    f[ball] -= (mu[ball] * f[ball]).sum() / mu[ball].sum()
    ens.append(f)
for _ in range(8):
    f = np.zeros(space.n_points)
    f[ball] = rng.choice([-1.0, 1.0], size=ball.size)
    f[ball] -= (mu[ball] * f[ball]).sum() / mu[ball].sum()
    ens.append(f)
fit = criterion_check(dec, mult.bochner_riesz(1.0, 2.0), M=2, center=0,
                      radius=1.0, j_list=range(2, 7), ensemble=ens)
print("criterion M=2 BR(1,2): slope %.3f [%.3f, %.3f] resid %.3f vals %s"
      % (fit.fitted_slope, fit.slope_lo, fit.slope_hi, fit.residual_rms,
         np.array2string(fit.values, precision=3)))

# --- criterion 7: threshold sweep
t0 = time.time()
fams = []
for n in (128, 256, 512):
    s, o = torus1d(n, 0.25)
    fams.append((s, spectral_decompose(o)))
rep = riesz_threshold_sweep(fams, p=1.0, q=2.0,
                            delta_list=[-0.25, 0.25, 1.0],
                            mode_fractions=[0.125, 0.25], seed=11)
for row in rep.rows:
    print("  N=%4d frac=%.3f R=%.3f delta=%+.2f ratio=%.4f"
          % (row.n_points, row.mode_fraction, row.cutoff, row.delta, row.ratio))
print("verdicts:", rep.verdicts)
for d in (-0.25, 0.25, 1.0):
    print("profile delta=%+.2f:" % d, ["%.3f" % v for v in rep.ratios(d)])
print("sweep %.1fs" % (time.time() - t0))
