"""Prototype: criterion 5 radius sweep; criterion 7 fixed-domain semantics."""
import numpy as np

from specmult import multiplier as mult
from specmult.calculus import spectral_decompose
from specmult.estimates import offdiag_decay
from specmult.hardy import cone_plan, default_ensemble, hardy_operator_ratio
from specmult.scenarios import torus1d

space, op = torus1d(512, 0.25)
dec = spectral_decompose(op)

for r in (1.0, 2.0, 4.0):
    for delta, s in ((2.0, 1.0), (4.0, 2.0)):
        F = mult.bochner_riesz(1.0, delta)
        try:
            fit = offdiag_decay(dec, F, center=0, radius=r,
                                j_list=range(2, 7))
            print("r=%g delta=%g: slope %.3f resid %.3f npts %d vals %s"
                  % (r, delta, fit.fitted_slope, fit.residual_rms,
                     fit.j_values.size,
                     np.array2string(fit.values, precision=2)))
        except ValueError as e:
            print("r=%g delta=%g: %s" % (r, delta, e))

# fixed-domain family for the sweep: domain length 32
print()
print("fixed-domain sweep, half-offset cutoffs")
for frac in (0.125, 0.25):
    for n in (128, 256, 512):
        s_, o_ = torus1d(n, 32.0 / n)
        d_ = spectral_decompose(o_)
        band = d_.sqrt_eigenvalues.max()
        k = int(np.floor(frac * n))
        R = band * np.sin(np.pi * (k + 0.5) / n)
        # check separation from eigenvalues
        gap = np.abs(d_.sqrt_eigenvalues - R).min()
        ens = default_ensemble(d_, np.random.default_rng(
            np.random.SeedSequence([11, n])))
        plan = cone_plan(s_)
        for delta in (-0.25, 0.25, 1.0):
            F = mult.bochner_riesz(R, delta)
            rep = hardy_operator_ratio(d_, F, p=1.0, ensemble=ens, plan=plan)
            worst = max(rep.rows, key=lambda t: t[3])
            print("  N=%4d frac=%.3f R=%7.3f gap=%.4f delta=%+.2f "
                  "ratio=%8.4f  [%s]"
                  % (n, frac, R, gap, delta, rep.max_ratio, worst[0]))
