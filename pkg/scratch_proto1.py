"""Prototype: criteria 2-6 magnitudes on torus1d N=512 h=1/4."""
import time

import numpy as np

from specmult import multiplier as mult
from specmult.calculus import (spectral_decompose, verify_davies_gaffney,
                               verify_finite_speed, multiplier_kernel,
                               mass_outside_radius, wave_kernel)
from specmult.estimates import (spectral_measure_exponent, offdiag_decay,
                                criterion_check)
from specmult.scenarios import torus1d

t0 = time.time()
space, op = torus1d(512, 0.25)
dec = spectral_decompose(op)
print("decompose %.1fs" % (time.time() - t0))

# --- criterion 2: finite speed, t=10, radius 11, mass <= 1e-3
t0 = time.time()
rep = verify_finite_speed(dec, 10.0)
wk = wave_kernel(dec, 10.0)
m11 = mass_outside_radius(space, wk, 11.0)
print("FS: eff radius %.3f allowed %.3f verdict %s; mass outside 11: %.3e"
      % (rep.effective_radius, rep.allowed_radius, rep.within_cone, m11))

# sinc rho=5: kernel outside 5*1.1
ks = multiplier_kernel(dec, mult.sinc(5.0))
print("sinc rho=5 mass outside 5.5: %.3e; outside 5.0: %.3e"
      % (mass_outside_radius(space, ks, 5.5), mass_outside_radius(space, ks, 5.0)))
print("FS block %.1fs" % (time.time() - t0))

# --- criterion 3: DG fit, distances {8,16,32} grid units, t in [1,16]
t0 = time.time()
h = 0.25
pairs = []
for d_idx in (8, 16, 32):
    pairs.append((np.array([0]), np.array([d_idx])))
rep = verify_davies_gaffney(dec, pairs, [1.0, 2.0, 4.0, 8.0, 16.0])
print("DG grid-unit distances: c=%.3f C=%.3f resid=%.3f"
      % (rep.fitted_c, rep.prefactor, rep.max_residual))
pairs = [(np.array([0]), np.array([int(d / h)])) for d in (8, 16, 32)]
rep2 = verify_davies_gaffney(dec, pairs, [1.0, 2.0, 4.0, 8.0, 16.0])
print("DG length distances:    c=%.3f C=%.3f resid=%.3f"
      % (rep2.fitted_c, rep2.prefactor, rep2.max_residual))
print("DG block %.1fs" % (time.time() - t0))

# --- criterion 4: spectral measure exponent, lam in [0.5,2], p0=1
t0 = time.time()
for n in (256, 512):
    s2, op2 = torus1d(n, 0.25)
    d2 = spectral_decompose(op2)
    slope, samples = spectral_measure_exponent(
        d2, np.geomspace(0.5, 2.0, 7), half_width=0.25, p0=1)
    counts = [s.count for s in samples]
    print("spectral measure N=%d: slope %.3f counts %s" % (n, slope, counts))
print("SM block %.1fs" % (time.time() - t0))

# --- criterion 5: offdiag decay BR delta=2 vs delta=4
t0 = time.time()
R = 2.0
for delta in (2.0, 4.0):
    F = mult.bochner_riesz(R, delta)
    fit = offdiag_decay(dec, F, center=0, radius=2.0, j_list=range(1, 7))
    print("offdiag delta=%g: slope %.3f [%.3f, %.3f] resid %.3f vals %s"
          % (delta, fit.fitted_slope, fit.slope_lo, fit.slope_hi,
             fit.residual_rms,
             np.array2string(fit.values, precision=2)))
print("offdiag block %.1fs" % (time.time() - t0))

# --- criterion 6: criterion quantity M=2
t0 = time.time()
rngc = np.random.default_rng(5)
fit = criterion_check(dec, mult.indicator(1.0), M=2, center=0, radius=2.0,
                      j_list=range(1, 7), rng=rngc)
print("criterion M=2: slope %.3f [%.3f, %.3f] vals %s"
      % (fit.fitted_slope, fit.slope_lo, fit.slope_hi,
         np.array2string(fit.values, precision=3)))
print("criterion block %.1fs" % (time.time() - t0))
