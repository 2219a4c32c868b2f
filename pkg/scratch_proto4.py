"""Prototype: 2pi-domain sweep with literal R = N/8, N/4 and modulated atoms."""
import numpy as np

from specmult import multiplier as mult
from specmult.calculus import spectral_decompose
from specmult.hardy import (cone_plan, default_ensemble, hardy_operator_ratio,
                            make_atom, project_range)
from specmult.scenarios import torus1d


def modulated_atoms(dec, space, freq, rng):
    """Wave packets at the cutoff frequency, several widths."""
    out = []
    n = space.n_points
    x = np.arange(n) * space.min_spacing
    for wmult in (4.0, 16.0, 64.0):
        w = wmult * space.min_spacing
        envelope = np.exp(-((x - x[n // 2]) / w) ** 2)
        f = envelope * np.cos(freq * x)
        f = project_range(dec, f)
        nrm = np.sqrt((space.measure * f ** 2).sum())
        if nrm > 0:
            out.append(("modatom w=%g" % w, f / nrm))
    return out


for n in (128, 256, 512):
    h = 2 * np.pi / n
    s_, o_ = torus1d(n, h)
    d_ = spectral_decompose(o_)
    plan = cone_plan(s_)
    rng = np.random.default_rng(np.random.SeedSequence([11, n]))
    base = default_ensemble(d_, rng)
    for R in (n / 8.0, n / 4.0):
        gap = np.abs(d_.sqrt_eigenvalues - R).min()
        ens = base + modulated_atoms(d_, s_, R, rng)
        for delta in (-0.25, 0.25, 1.0):
            F = mult.bochner_riesz(R, delta)
            rep = hardy_operator_ratio(d_, F, p=1.0, ensemble=ens, plan=plan)
            worst = max(rep.rows, key=lambda t: t[3])
            print("N=%4d R=%6.1f gap=%.3f delta=%+.2f ratio=%8.4f [%s]"
                  % (n, R, gap, delta, rep.max_ratio, worst[0]))
