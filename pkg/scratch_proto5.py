"""Prototype: enriched probe family for the threshold sweep."""
import numpy as np

from specmult import multiplier as mult
from specmult.calculus import spectral_decompose
from specmult.hardy import (cone_plan, default_ensemble, hardy_operator_ratio,
                            project_range)
from specmult.scenarios import torus1d


def probes(dec, space, freq, rng):
    out = []
    n = space.n_points
    h = space.min_spacing
    x = np.arange(n) * h
    x0 = x[n // 2]
    # gaussian-envelope packets down to the finest scale
    for wmult in (1.0, 2.0, 4.0, 16.0, 64.0):
        w = wmult * h
        f = np.exp(-((x - x0) / w) ** 2) * np.cos(freq * (x - x0))
        f = project_range(dec, f)
        nrm = np.sqrt((space.measure * f ** 2).sum())
        if nrm > 0:
            out.append(("gpacket w=%gh" % wmult, f / nrm))
    # hard-envelope packets (sinc side lobes concentrate at the edge)
    for wmult in (2.0, 8.0, 32.0):
        w = wmult * h
        f = np.where(np.abs(x - x0) <= w, np.cos(freq * (x - x0)), 0.0)
        f = project_range(dec, f)
        nrm = np.sqrt((space.measure * f ** 2).sum())
        if nrm > 0:
            out.append(("hpacket w=%gh" % wmult, f / nrm))
    # bandpass noise just inside the cutoff
    sq = dec.sqrt_eigenvalues
    for width in (1.0, 4.0):
        mask = (sq < freq) & (sq >= freq - width)
        if mask.sum() == 0:
            continue
        g = mask.astype(float)
        z = rng.standard_normal(n)
        f = dec.vectors @ (g * (dec.vectors.T @ (space.measure * z)))
        nrm = np.sqrt((space.measure * f ** 2).sum())
        if nrm > 0:
            out.append(("bandpass w=%g" % width, f / nrm))
    return out


prof = {}
for n in (128, 256, 512):
    h = 2 * np.pi / n
    s_, o_ = torus1d(n, h)
    d_ = spectral_decompose(o_)
    plan = cone_plan(s_)
    rng = np.random.default_rng(np.random.SeedSequence([11, n]))
    base = default_ensemble(d_, rng)
    for R in (n / 8.0, n / 4.0):
        ens = base + probes(d_, s_, R, rng)
        for delta in (-0.25, 1.0):
            F = mult.bochner_riesz(R, delta)
            rep = hardy_operator_ratio(d_, F, p=1.0, ensemble=ens, plan=plan)
            worst = max(rep.rows, key=lambda t: t[3])
            print("N=%4d R=%6.1f delta=%+.2f ratio=%8.4f [%s]"
                  % (n, R, delta, rep.max_ratio, worst[0]))
            prof.setdefault(delta, {}).setdefault(n, 0.0)
            prof[delta][n] = max(prof[delta][n], rep.max_ratio)

for delta, byn in prof.items():
    vals = [byn[k] for k in sorted(byn)]
    print("delta=%+.2f profile %s growth %.3f"
          % (delta, ["%.3f" % v for v in vals], vals[-1] / vals[0]))
