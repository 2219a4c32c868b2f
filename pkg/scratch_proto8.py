"""Prototype: multiplier norm boundary behavior under grid refinement."""
import numpy as np

from specmult import multiplier as mult

# W^{beta,q} membership edge for (1-lam^2)^delta_+ sits at delta = beta-1/q.
beta, q = 1.0, 2.0
thr = beta - 1.0 / q
for d in (thr + 0.25, thr - 0.25):
    vals = []
    for step in (1.0 / 256, 1.0 / 512, 1.0 / 1024):
        line = mult.sample_line(mult.bochner_riesz(1.0, d), halfwidth=2.0,
                                step=step)
        vals.append(mult.sobolev_norm(line, s=beta, q=q))
    g12 = vals[1] / vals[0]
    g23 = vals[2] / vals[1]
    print("delta %.2f: norms %s  step-halving growth %.4f %.4f" % (
        d, ["%.5g" % v for v in vals], g12, g23))

# Besov-vs-Sobolev ratio across a small multiplier family.
fams = [mult.bochner_riesz(1.0, dd) for dd in (0.75, 1.0, 1.5, 2.0, 3.0)]
fams += [mult.gaussian(0.5), mult.gaussian(1.0), mult.indicator(1.0),
         mult.bochner_riesz(2.0, 1.0), mult.bochner_riesz(0.5, 1.5)]
s, eps, qq = 1.0, 0.1, 2.0
ratios = []
for i, Fm in enumerate(fams):
    line = mult.sample_line(Fm, halfwidth=4.0, step=1.0 / 512)
    bn = mult.besov_norm(line, s=s - eps, q=qq)
    wn = mult.sobolev_norm(line, s=s, q=qq)
    ratios.append(bn / wn)
    print("fam %-28s besov %.5g sobolev %.5g ratio %.4f" % (
        Fm.label, bn, wn, bn / wn))
print("ratio range: [%.4f, %.4f]" % (min(ratios), max(ratios)))
