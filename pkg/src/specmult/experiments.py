"""Experiment runners and the sweep orchestrator.

Every experiment is decomposed into cells: pure functions keyed by a
sortable tuple that each produce a list of plain-dict rows.  Cells may
run on a thread pool; each writes its rows to its own temporary file,
and the orchestrator merges the files in sorted key order, so the CSV
is byte-identical no matter how the scheduler interleaved the work.  A
failing cell is logged with its parameters and the sweep continues.

Verdict lines always end with the bracketed list of row keys they were
computed from, so every reported number can be traced back to the CSV.
"""

import json
import os
import shutil
import time
import traceback
import zlib
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .calculus import (spectral_decompose, verify_davies_gaffney,
                       verify_finite_speed)
from .config import build_multiplier, validate_config
from .estimates import criterion_check, offdiag_decay, restriction_constant
from .estimates import spectral_measure_norm
from .hardy import (SweepCell, default_ensemble, hardy_operator_ratio,
                    sweep_family_rows, sweep_verdicts)
from .reports import ExperimentReport, svg_lineplot, write_csv
from .scenarios import build_scenario
from .space import fit_doubling_dimension


class Cell:
    """One unit of sweep work: a sort key, its parameters, a thunk."""

    __slots__ = ("key", "params", "fn")

    def __init__(self, key, params, fn):
        self.key = key
        self.params = params
        self.fn = fn


def _entropy(*parts):
    """Stable nonnegative integers for SeedSequence from mixed values."""
    out = []
    for p in parts:
        if isinstance(p, (int, np.integer)):
            out.append(int(p) & 0xFFFFFFFFFFFFFFFF)
        elif isinstance(p, float):
            out.append(int(np.float64(p).view(np.uint64)))
        else:
            out.append(zlib.crc32(str(p).encode()))
    return out


def _scenario_args(cfg, n):
    scen = cfg["scenario"]
    if scen == "graph_file":
        args = {"path": cfg["path"]}
        if "measure_path" in cfg:
            args["measure_path"] = cfg["measure_path"]
        return args
    args = {"side": int(n)}
    if "domain_length" in cfg:
        args["spacing"] = cfg["domain_length"] / n
    elif "spacing" in cfg:
        args["spacing"] = cfg["spacing"]
    if scen == "inverse_square" and "c" in cfg:
        args["c"] = cfg["c"]
    return args


def _build(cfg, n):
    space, op = build_scenario(cfg["scenario"], **_scenario_args(cfg, n))
    return space, spectral_decompose(op)


def _n_list(cfg):
    if cfg["scenario"] == "graph_file":
        return [0]
    return list(cfg["n_points"])


def _keys_of(rows):
    return " | ".join(r["key"] for r in rows)


# -- runners ---------------------------------------------------------------
# Each returns (columns, cells, finish) where finish(rows) gives
# (verdict lines, svg specs); an svg spec is (stem, series, xlabel,
# ylabel, title, logx, logy).


def _run_hardy_ratio(cfg, seed):
    F = build_multiplier(cfg)
    p = cfg.get("p", 2.0)
    columns = ["key", "experiment", "n_points", "probe", "numerator",
               "denominator", "ratio", "seed"]
    cells = []
    for n in _n_list(cfg):
        def fn(n=n):
            space, decomp = _build(cfg, n)
            rng = np.random.default_rng(
                np.random.SeedSequence(_entropy(seed, space.n_points)))
            ensemble = default_ensemble(decomp, rng, p=p)
            rep = hardy_operator_ratio(decomp, F, p, ensemble=ensemble)
            out = []
            for label, num, den, ratio in rep.rows:
                out.append({"key": "n=%d;probe=%s" % (space.n_points, label),
                            "experiment": "hardy_ratio",
                            "n_points": space.n_points, "probe": label,
                            "numerator": float(num),
                            "denominator": float(den),
                            "ratio": float(ratio), "seed": seed})
            return out
        cells.append(Cell((n,), {"n_points": n}, fn))

    def finish(rows):
        verdicts = []
        byn = {}
        for r in rows:
            byn.setdefault(int(r["n_points"]), []).append(r)
        for n in sorted(byn):
            grp = byn[n]
            best = max(grp, key=lambda r: float(r["ratio"]))
            verdicts.append(
                "n=%d: max ratio %.6g on probe %r over %d probes [rows %s]"
                % (n, float(best["ratio"]), best["probe"], len(grp),
                   _keys_of(grp)))
        svgs = []
        if len(byn) >= 2:
            xs = sorted(byn)
            ys = [max(float(r["ratio"]) for r in byn[n]) for n in xs]
            svgs.append(("hardy_ratio", [("max ratio", xs, ys)],
                         "resolution N", "ratio",
                         "Hardy ratio vs resolution", True, True))
        return verdicts, svgs

    return columns, cells, finish


def _run_riesz_sweep(cfg, seed):
    ns = cfg["n_points"]
    deltas = cfg["deltas"]
    p, q = cfg["p"], cfg["q"]
    growth = cfg.get("growth_factor", 2.0)
    literal = cfg.get("cutoffs")
    fracs = cfg.get("cutoff_fractions")
    if literal is None and fracs is None:
        fracs = [0.125, 0.25]

    def cutoffs_for(n):
        if literal is not None:
            return list(literal)
        return [f * n for f in fracs]

    columns = ["key", "experiment", "n_points", "cutoff", "delta", "ratio",
               "seed"]
    cells = []
    for n in ns:
        def fn(n=n):
            space, decomp = _build(cfg, n)
            out = []
            for sc in sweep_family_rows(space, decomp, p, deltas,
                                        cutoffs_for(n), seed=seed):
                out.append({"key": "n=%d;R=%g;delta=%g"
                                   % (sc.n_points, sc.cutoff, sc.delta),
                            "experiment": "riesz_sweep",
                            "n_points": sc.n_points, "cutoff": sc.cutoff,
                            "delta": sc.delta, "ratio": sc.ratio,
                            "seed": seed})
            return out
        cells.append(Cell((n,), {"n_points": n}, fn))

    def finish(rows):
        sweep = [SweepCell(n_points=int(r["n_points"]),
                           cutoff=float(r["cutoff"]),
                           delta=float(r["delta"]),
                           ratio=float(r["ratio"])) for r in rows]
        rep = sweep_verdicts(sweep, deltas, p, q, growth_factor=growth)
        verdicts, series = [], []
        for d in deltas:
            sub = [r for r in rows if float(r["delta"]) == d]
            cuts, prof = rep.profile(d)
            if prof.size:
                prof_txt = " -> ".join("R=%g:%.4g" % (c, v)
                                       for c, v in zip(cuts, prof))
                factor = prof[-1] / prof[0] if prof[0] > 0 else np.inf
                verdicts.append(
                    "delta=%g: %s (profile %s; end/start %.3f) [rows %s]"
                    % (d, rep.verdicts[d], prof_txt, factor, _keys_of(sub)))
            for c, spread in sorted(rep.duplicates(d).items()):
                dup = [r for r in sub if float(r["cutoff"]) == c]
                verdicts.append(
                    "delta=%g cross-grid spread at R=%g: %.4f [rows %s]"
                    % (d, c, spread, _keys_of(dup)))
            byn = {}
            for r in sub:
                n = int(r["n_points"])
                byn[n] = max(byn.get(n, 0.0), float(r["ratio"]))
            xs = sorted(byn)
            series.append(("delta=%g" % d, xs, [byn[n] for n in xs]))
        svgs = [("riesz_sweep", series, "resolution N", "max ratio",
                 "Truncation ratio sweep", True, True)]
        return verdicts, svgs

    return columns, cells, finish


def _decay_runner(cfg, seed, which):
    p0 = cfg.get("p0", 1.0)
    j_lo, j_hi = cfg.get("j_min", 2), cfg.get("j_max", 6)
    j_list = list(range(j_lo, j_hi + 1))
    radii = cfg.get("radius", [1.0])
    F = build_multiplier(cfg)
    m_power = cfg.get("m_power", 2)
    columns = ["key", "experiment", "n_points", "radius", "j", "value",
               "seed"]
    cells = []
    for n in _n_list(cfg):
        for r in radii:
            def fn(n=n, r=r):
                space, decomp = _build(cfg, n)
                center = cfg.get("center", space.n_points // 2)
                rng = np.random.default_rng(np.random.SeedSequence(
                    _entropy(seed, space.n_points, r)))
                if which == "offdiag":
                    fit = offdiag_decay(decomp, F, center, r, j_list,
                                        p0=p0, rng=rng)
                else:
                    fit = criterion_check(decomp, F, m_power, center, r,
                                          j_list, rng=rng)
                out = []
                for j, v in zip(fit.j_values, fit.values):
                    out.append({"key": "n=%d;r=%g;j=%d"
                                       % (space.n_points, r, int(j)),
                                "experiment": which,
                                "n_points": space.n_points,
                                "radius": float(r), "j": int(j),
                                "value": float(v), "seed": seed})
                fit_row = {"key": "n=%d;r=%g;fit" % (space.n_points, r),
                           "experiment": which + "_fit",
                           "n_points": space.n_points, "radius": float(r),
                           "j": "", "value": float(fit.fitted_slope),
                           "seed": seed}
                return out + [fit_row]
            cells.append(Cell((n, r), {"n_points": n, "radius": r}, fn))

    def finish(rows):
        meas = [r for r in rows if r["experiment"] == which]
        fits = [r for r in rows if r["experiment"] == which + "_fit"]
        verdicts, series = [], []
        for fr in sorted(fits, key=lambda r: (int(r["n_points"]),
                                              float(r["radius"]))):
            n, r = int(fr["n_points"]), float(fr["radius"])
            sub = [m for m in meas
                   if int(m["n_points"]) == n and float(m["radius"]) == r]
            verdicts.append(
                "n=%d r=%g: fitted log2 slope %.4g over %d annuli "
                "[rows %s | %s]" % (n, r, float(fr["value"]), len(sub),
                                    _keys_of(sub), fr["key"]))
            xs = [2.0 ** int(m["j"]) * r for m in sub]
            ys = [float(m["value"]) for m in sub]
            series.append(("n=%d r=%g" % (n, r), xs, ys))
        svgs = [(which, series, "annulus outer radius", "norm",
                 "Dyadic decay", True, True)] if series else []
        return verdicts, svgs

    return columns, cells, finish


def _run_offdiag(cfg, seed):
    return _decay_runner(cfg, seed, "offdiag")


def _run_criterion(cfg, seed):
    return _decay_runner(cfg, seed, "criterion")


def _run_davies_gaffney(cfg, seed):
    distances = cfg.get("distances", [8.0, 16.0, 32.0])
    t_grid = np.geomspace(cfg.get("t_min", 1.0), cfg.get("t_max", 16.0),
                          cfg.get("t_count", 5))
    columns = ["key", "experiment", "n_points", "distance", "t", "norm",
               "seed"]
    n0 = _n_list(cfg)[0]

    def fn():
        space, decomp = _build(cfg, n0)
        pairs = []
        for d in distances:
            j = int(np.argmin(np.abs(space.distance[0] - d)))
            if j == 0:
                raise ValueError("distance %g has no separated partner" % d)
            pairs.append((np.array([0]), np.array([j])))
        rep = verify_davies_gaffney(decomp, pairs, t_grid)
        out = []
        for d, t, v in rep.rows:
            out.append({"key": "d=%g;t=%g" % (d, t),
                        "experiment": "davies_gaffney",
                        "n_points": space.n_points, "distance": float(d),
                        "t": float(t), "norm": float(v), "seed": seed})
        out.append({"key": "fit", "experiment": "davies_gaffney_fit",
                    "n_points": space.n_points, "distance": "",
                    "t": "", "norm": float(rep.fitted_c), "seed": seed})
        return out

    cells = [Cell((0,), {"n_points": n0}, fn)]

    def finish(rows):
        meas = [r for r in rows if r["experiment"] == "davies_gaffney"]
        fit = [r for r in rows if r["experiment"] == "davies_gaffney_fit"]
        verdicts, series = [], []
        if fit:
            verdicts.append("gaussian decay fit: c=%.4g [rows %s | fit]"
                            % (float(fit[0]["norm"]), _keys_of(meas)))
        byd = {}
        for m in meas:
            byd.setdefault(float(m["distance"]), []).append(m)
        for d in sorted(byd):
            grp = sorted(byd[d], key=lambda m: float(m["t"]))
            xs = [float(m["distance"]) ** 2 / float(m["t"]) for m in grp]
            ys = [float(m["norm"]) for m in grp]
            series.append(("d=%g" % d, xs, ys))
        svgs = [("davies_gaffney", series, "d^2 / t", "block norm",
                 "Heat semigroup separation decay", False, True)] \
            if series else []
        return verdicts, svgs

    return columns, cells, finish


def _run_finite_speed(cfg, seed):
    times = cfg.get("times", [1.0, 2.0, 4.0, 8.0])
    mass_tol = cfg.get("mass_tol", 1e-3)
    columns = ["key", "experiment", "n_points", "t", "effective_radius",
               "allowed_radius", "within_cone", "seed"]
    n0 = _n_list(cfg)[0]
    cells = []
    for t in times:
        def fn(t=t):
            space, decomp = _build(cfg, n0)
            rep = verify_finite_speed(decomp, t, mass_tol=mass_tol)
            return [{"key": "t=%g" % t, "experiment": "finite_speed",
                     "n_points": space.n_points, "t": float(t),
                     "effective_radius": rep.effective_radius,
                     "allowed_radius": rep.allowed_radius,
                     "within_cone": rep.within_cone, "seed": seed}]
        cells.append(Cell((t,), {"t": t}, fn))

    def finish(rows):
        verdicts = []
        for r in sorted(rows, key=lambda r: float(r["t"])):
            ok = str(r["within_cone"]).lower() in ("true", "1")
            verdicts.append(
                "t=%g: %s (radius %.4g vs allowed %.4g) [rows %s]"
                % (float(r["t"]), "inside cone" if ok else "ESCAPES CONE",
                   float(r["effective_radius"]), float(r["allowed_radius"]),
                   r["key"]))
        xs = [float(r["t"]) for r in rows]
        eff = [float(r["effective_radius"]) for r in rows]
        alw = [float(r["allowed_radius"]) for r in rows]
        svgs = [("finite_speed",
                 [("effective", xs, eff), ("allowed", xs, alw)],
                 "t", "radius", "Wave propagation radius", False, False)] \
            if rows else []
        return verdicts, svgs

    return columns, cells, finish


def _run_restriction(cfg, seed):
    F = build_multiplier(cfg)
    if F.support_radius is None:
        raise ValueError("restriction needs a compactly supported "
                         "multiplier")
    R = F.support_radius
    p0 = cfg.get("p0", 1.0)
    q = cfg.get("q", 2.0)
    dim_n = cfg.get("dim_n", 1.0)
    r_list = cfg.get("r_list", [1.0, 2.0, 4.0])
    columns = ["key", "experiment", "n_points", "center", "radius",
               "volume", "lhs_upper", "rhs_factor", "ratio", "seed"]
    cells = []
    for n in _n_list(cfg):
        def fn(n=n):
            space, decomp = _build(cfg, n)
            rng = np.random.default_rng(np.random.SeedSequence(
                _entropy(seed, space.n_points)))
            centers = np.linspace(0, space.n_points - 1, 3, dtype=int)
            balls = [(int(c), float(r)) for c in centers for r in r_list]
            rep = restriction_constant(decomp, F, R, p0, q, balls, dim_n,
                                       rng=rng)
            out = []
            for row in rep.rows:
                out.append({"key": "n=%d;center=%d;r=%g"
                                   % (space.n_points, row.center,
                                      row.radius),
                            "experiment": "restriction",
                            "n_points": space.n_points,
                            "center": row.center, "radius": row.radius,
                            "volume": row.volume,
                            "lhs_upper": row.lhs_upper,
                            "rhs_factor": row.rhs_factor,
                            "ratio": row.ratio_upper, "seed": seed})
            for c, r in rep.skipped:
                out.append({"key": "n=%d;center=%d;r=%g;skipped"
                                   % (space.n_points, c, r),
                            "experiment": "restriction_skipped",
                            "n_points": space.n_points, "center": c,
                            "radius": r, "volume": "", "lhs_upper": "",
                            "rhs_factor": "", "ratio": "", "seed": seed})
            return out
        cells.append(Cell((n,), {"n_points": n}, fn))

    def finish(rows):
        meas = [r for r in rows if r["experiment"] == "restriction"]
        verdicts, series = [], []
        byn = {}
        for r in meas:
            byn.setdefault(int(r["n_points"]), []).append(r)
        for n in sorted(byn):
            grp = byn[n]
            const = max(float(r["ratio"]) for r in grp)
            skipped = [r for r in rows
                       if r["experiment"] == "restriction_skipped"
                       and int(r["n_points"]) == n]
            verdicts.append(
                "n=%d: localized-bound constant %.4g over %d balls "
                "(%d below scale 1/R skipped) [rows %s]"
                % (n, const, len(grp), len(skipped), _keys_of(grp)))
            byr = {}
            for r in grp:
                rad = float(r["radius"])
                byr[rad] = max(byr.get(rad, 0.0), float(r["ratio"]))
            xs = sorted(byr)
            series.append(("n=%d" % n, xs, [byr[x] for x in xs]))
        svgs = [("restriction", series, "ball radius", "ratio",
                 "Localized multiplier bound", True, True)] \
            if series else []
        return verdicts, svgs

    return columns, cells, finish


def _run_spectral_measure(cfg, seed):
    p0 = cfg.get("p0", 1.0)
    lam_grid = np.geomspace(cfg.get("lam_min", 0.5),
                            cfg.get("lam_max", 2.0),
                            cfg.get("lam_count", 7))
    hw = cfg.get("halfwidth", 0.25)
    columns = ["key", "experiment", "n_points", "lam", "halfwidth",
               "count", "norm_lower", "norm_upper", "seed"]
    cells = []
    for n in _n_list(cfg):
        def fn(n=n):
            space, decomp = _build(cfg, n)
            rng = np.random.default_rng(np.random.SeedSequence(
                _entropy(seed, space.n_points)))
            out = []
            for lam in lam_grid:
                s = spectral_measure_norm(decomp, float(lam), hw, p0,
                                          rng=rng)
                out.append({"key": "n=%d;lam=%g" % (space.n_points, s.lam),
                            "experiment": "spectral_measure",
                            "n_points": space.n_points, "lam": s.lam,
                            "halfwidth": s.half_width, "count": s.count,
                            "norm_lower": s.norm_lower,
                            "norm_upper": s.norm_upper, "seed": seed})
            return out
        cells.append(Cell((n,), {"n_points": n}, fn))

    def finish(rows):
        verdicts, series = [], []
        byn = {}
        for r in rows:
            byn.setdefault(int(r["n_points"]), []).append(r)
        for n in sorted(byn):
            grp = sorted(byn[n], key=lambda r: float(r["lam"]))
            kept = [r for r in grp if int(r["count"]) > 0
                    and float(r["norm_upper"]) > 0]
            if len(kept) >= 3:
                xs = np.log([float(r["lam"]) for r in kept])
                ys = np.log([float(r["norm_upper"]) for r in kept])
                slope = float(np.polyfit(xs, ys, 1)[0])
                verdicts.append(
                    "n=%d: window-norm exponent %.4g over %d windows "
                    "[rows %s]" % (n, slope, len(kept), _keys_of(kept)))
            series.append(("n=%d" % n,
                           [float(r["lam"]) for r in kept],
                           [float(r["norm_upper"]) for r in kept]))
        svgs = [("spectral_measure", series, "lambda", "window norm",
                 "Smoothed spectral measure", True, True)] \
            if series else []
        return verdicts, svgs

    return columns, cells, finish


def _run_doubling(cfg, seed):
    columns = ["key", "experiment", "n_points", "dimension_n",
               "constant_C", "residual", "samples", "seed"]
    cells = []
    for n in _n_list(cfg):
        def fn(n=n):
            space, op = build_scenario(cfg["scenario"],
                                       **_scenario_args(cfg, n))
            fit = fit_doubling_dimension(space)
            return [{"key": "n=%d" % space.n_points,
                     "experiment": "doubling",
                     "n_points": space.n_points,
                     "dimension_n": fit.dimension_n,
                     "constant_C": fit.constant_C,
                     "residual": fit.residual, "samples": fit.samples,
                     "seed": seed}]
        cells.append(Cell((n,), {"n_points": n}, fn))

    def finish(rows):
        verdicts = []
        for r in sorted(rows, key=lambda r: int(r["n_points"])):
            verdicts.append(
                "n=%d: doubling exponent %.4g with constant %.4g "
                "(residual %.4g) [rows %s]"
                % (int(r["n_points"]), float(r["dimension_n"]),
                   float(r["constant_C"]), float(r["residual"]), r["key"]))
        return verdicts, []

    return columns, cells, finish


RUNNERS = {
    "hardy_ratio": _run_hardy_ratio,
    "riesz_sweep": _run_riesz_sweep,
    "offdiag_decay": _run_offdiag,
    "criterion_decay": _run_criterion,
    "davies_gaffney": _run_davies_gaffney,
    "finite_speed": _run_finite_speed,
    "restriction": _run_restriction,
    "spectral_measure": _run_spectral_measure,
    "doubling": _run_doubling,
}


def run_experiment(cfg, out_dir, threads=1):
    """Validate, execute all cells, merge, serialize, report.

    Cells run on a thread pool when threads > 1; each cell's rows land
    in a per-cell temporary file named by the cell's rank in sorted key
    order, and the merge walks ranks in order, so the assembled table
    does not depend on completion order.  Failed cells leave no file;
    they are reported and the rest of the sweep stands.
    """
    cfg = validate_config(cfg)
    seed = cfg.get("seed", 0)
    t0 = time.time()
    columns, cells, finish = RUNNERS[cfg["experiment"]](cfg, seed)
    os.makedirs(out_dir, exist_ok=True)
    cell_dir = os.path.join(out_dir, ".cells")
    shutil.rmtree(cell_dir, ignore_errors=True)
    os.makedirs(cell_dir)
    order = sorted(range(len(cells)), key=lambda i: cells[i].key)
    rank = {i: r for r, i in enumerate(order)}
    failures = []

    def exec_cell(i):
        cell = cells[i]
        try:
            rows = cell.fn()
        except Exception:
            failures.append((cell.key, "cell %s %s failed:\n%s"
                             % (cell.key, cell.params,
                                traceback.format_exc())))
            return
        path = os.path.join(cell_dir, "cell_%05d.json" % rank[i])
        with open(path, "w") as fh:
            json.dump(rows, fh)

    if threads > 1 and len(cells) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(exec_cell, range(len(cells))))
    else:
        for i in range(len(cells)):
            exec_cell(i)

    rows = []
    for r in range(len(cells)):
        path = os.path.join(cell_dir, "cell_%05d.json" % r)
        if os.path.exists(path):
            with open(path) as fh:
                rows.extend(json.load(fh))
    shutil.rmtree(cell_dir)

    verdicts, svg_specs = finish(rows)
    csv_path = os.path.join(out_dir, cfg["experiment"] + ".csv")
    write_csv(csv_path, columns, rows)
    svg_paths = []
    for stem, series, xl, yl, title, logx, logy in svg_specs:
        p = os.path.join(out_dir, stem + ".svg")
        svg_lineplot(p, series, xl, yl, title, logx=logx, logy=logy)
        svg_paths.append(p)

    resolutions = sorted({int(r["n_points"]) for r in rows
                          if "n_points" in r})
    report = ExperimentReport(
        config=dict(cfg), csv_paths=[csv_path], svg_paths=svg_paths,
        verdicts=verdicts,
        cell_failures=[txt for _, txt in sorted(failures,
                                                key=lambda f: f[0])],
        wall_clock=time.time() - t0, resolutions=resolutions,
        version=__version__)
    with open(os.path.join(out_dir, "report.txt"), "w") as fh:
        fh.write(report.to_text())
    return report
