"""Experiment configuration: flat YAML in, validated dict out.

A config file is a single mapping whose values are scalars or lists of
scalars; nesting is rejected so that files stay greppable and the
emitted form round-trips exactly.  Validation is schema-driven per
experiment and runs before any compute, so a bad exponent fails in
milliseconds, not after an eigensolve.
"""

import io

import yaml


class ConfigError(ValueError):
    pass


def _is_scalar(v):
    return isinstance(v, (str, int, float, bool)) or v is None


def load_config(path):
    with open(path) as fh:
        data = yaml.safe_load(fh)
    if not isinstance(data, dict):
        raise ConfigError("config must be a key-value mapping")
    for k, v in data.items():
        if isinstance(v, list):
            if not all(_is_scalar(x) for x in v):
                raise ConfigError("key %r: lists may only hold scalars" % k)
        elif not _is_scalar(v):
            raise ConfigError("key %r: nested structures are not allowed"
                              % k)
    return data


def emit_config(cfg):
    """Canonical text form; load(emit(cfg)) == cfg."""
    buf = io.StringIO()
    yaml.safe_dump(cfg, buf, sort_keys=True, default_flow_style=None)
    return buf.getvalue()


def _positive_int(v, key):
    if isinstance(v, bool) or not isinstance(v, int) or v <= 0:
        raise ConfigError("%s must be a positive integer, got %r" % (key, v))
    return v


def _nonneg_int(v, key):
    if isinstance(v, bool) or not isinstance(v, int) or v < 0:
        raise ConfigError("%s must be a nonnegative integer, got %r"
                          % (key, v))
    return v


def _number(v, key, lo=None, hi=None, lo_open=False):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError("%s must be a number, got %r" % (key, v))
    v = float(v)
    if lo is not None and (v < lo or (lo_open and v == lo)):
        raise ConfigError("%s must be %s %g, got %g"
                          % (key, ">" if lo_open else ">=", lo, v))
    if hi is not None and v > hi:
        raise ConfigError("%s must be <= %g, got %g" % (key, hi, v))
    return v


def _p0_exponent(v, key):
    if v not in (1, 2, 1.0, 2.0):
        raise ConfigError("%s must be 1 or 2 (endpoint exponents only), "
                          "got %r" % (key, v))
    return float(v)


def _number_list(v, key, **kw):
    if not isinstance(v, list):
        v = [v]
    if not v:
        raise ConfigError("%s must not be empty" % key)
    return [_number(x, key, **kw) for x in v]


def _int_list(v, key):
    if not isinstance(v, list):
        v = [v]
    return [_positive_int(x, key) for x in v]


def _string(v, key):
    if not isinstance(v, str) or not v:
        raise ConfigError("%s must be a nonempty string" % key)
    return v


MULTIPLIER_KEYS = {
    "constant": {"multiplier_value"},
    "indicator": {"multiplier_r"},
    "bochner_riesz": {"multiplier_r", "multiplier_delta"},
    "gaussian": {"multiplier_width"},
    "sinc": {"multiplier_rho"},
    "table": {"multiplier_file"},
}

SCENARIO_KEYS = {
    "torus1d": {"n_points", "spacing", "domain_length"},
    "torus2d": {"n_points", "spacing", "domain_length"},
    "interval_dirichlet": {"n_points", "spacing", "domain_length"},
    "inverse_square": {"n_points", "spacing", "domain_length", "c"},
    "graph_file": {"path", "measure_path"},
}

COMMON_KEYS = {"experiment", "scenario", "seed", "out", "threads"}

EXPERIMENT_KEYS = {
    "hardy_ratio": {"p", "multiplier"},
    "riesz_sweep": {"p", "q", "deltas", "cutoff_fractions", "cutoffs",
                    "growth_factor"},
    "offdiag_decay": {"p0", "multiplier", "center", "radius", "j_min",
                      "j_max"},
    "criterion_decay": {"p0", "multiplier", "center", "radius", "j_min",
                        "j_max", "m_power"},
    "davies_gaffney": {"distances", "t_min", "t_max", "t_count"},
    "finite_speed": {"times", "mass_tol"},
    "restriction": {"p0", "q", "multiplier", "r_list", "dim_n"},
    "spectral_measure": {"p0", "lam_min", "lam_max", "lam_count",
                         "halfwidth"},
    "doubling": set(),
}

MULTIPLIER_EXPERIMENTS = {"hardy_ratio", "offdiag_decay", "criterion_decay",
                          "restriction"}

_CHECKS = {
    "seed": lambda v: _nonneg_int(v, "seed"),
    "threads": lambda v: _positive_int(v, "threads"),
    "n_points": lambda v: _int_list(v, "n_points"),
    "spacing": lambda v: _number(v, "spacing", lo=0, lo_open=True),
    "domain_length": lambda v: _number(v, "domain_length", lo=0,
                                       lo_open=True),
    "c": lambda v: _number(v, "c"),
    "p": lambda v: _number(v, "p", lo=0, lo_open=True),
    "q": lambda v: _number(v, "q", lo=1),
    "p0": lambda v: _p0_exponent(v, "p0"),
    "deltas": lambda v: _number_list(v, "deltas", lo=-1, lo_open=True),
    "cutoff_fractions": lambda v: _number_list(v, "cutoff_fractions",
                                               lo=0, lo_open=True),
    "cutoffs": lambda v: _number_list(v, "cutoffs", lo=0, lo_open=True),
    "growth_factor": lambda v: _number(v, "growth_factor", lo=1,
                                       lo_open=True),
    "center": lambda v: _nonneg_int(v, "center"),
    "radius": lambda v: _number_list(v, "radius", lo=0, lo_open=True),
    "j_min": lambda v: _positive_int(v, "j_min"),
    "j_max": lambda v: _positive_int(v, "j_max"),
    "m_power": lambda v: _positive_int(v, "m_power"),
    "distances": lambda v: _number_list(v, "distances", lo=0, lo_open=True),
    "t_min": lambda v: _number(v, "t_min", lo=0, lo_open=True),
    "t_max": lambda v: _number(v, "t_max", lo=0, lo_open=True),
    "t_count": lambda v: _positive_int(v, "t_count"),
    "times": lambda v: _number_list(v, "times", lo=0, lo_open=True),
    "mass_tol": lambda v: _number(v, "mass_tol", lo=0, lo_open=True),
    "lam_min": lambda v: _number(v, "lam_min", lo=0, lo_open=True),
    "lam_max": lambda v: _number(v, "lam_max", lo=0, lo_open=True),
    "lam_count": lambda v: _positive_int(v, "lam_count"),
    "halfwidth": lambda v: _number(v, "halfwidth", lo=0, lo_open=True),
    "r_list": lambda v: _number_list(v, "r_list", lo=0, lo_open=True),
    "dim_n": lambda v: _number(v, "dim_n", lo=0),
    "multiplier_value": lambda v: _number(v, "multiplier_value"),
    "multiplier_r": lambda v: _number(v, "multiplier_r", lo=0,
                                      lo_open=True),
    "multiplier_delta": lambda v: _number(v, "multiplier_delta", lo=-1,
                                          lo_open=True),
    "multiplier_width": lambda v: _number(v, "multiplier_width", lo=0,
                                          lo_open=True),
    "multiplier_rho": lambda v: _number(v, "multiplier_rho", lo=0,
                                        lo_open=True),
    "multiplier_file": lambda v: _string(v, "multiplier_file"),
    "path": lambda v: _string(v, "path"),
    "measure_path": lambda v: _string(v, "measure_path"),
    "out": lambda v: _string(v, "out"),
}


def validate_config(cfg):
    """Check keys, types, and ranges; returns a normalized copy.

    Scenario and experiment names must exist, every key must belong to
    the chosen experiment's schema, and exponents are range-checked
    here so invalid ones never reach a solver.
    """
    from .scenarios import SCENARIOS

    if "experiment" not in cfg:
        raise ConfigError("missing required key: experiment")
    if "scenario" not in cfg:
        raise ConfigError("missing required key: scenario")
    exp = cfg["experiment"]
    scen = cfg["scenario"]
    if exp not in EXPERIMENT_KEYS:
        raise ConfigError("unknown experiment %r; known: %s"
                          % (exp, ", ".join(sorted(EXPERIMENT_KEYS))))
    if scen not in SCENARIOS:
        raise ConfigError("unknown scenario %r; known: %s"
                          % (scen, ", ".join(sorted(SCENARIOS))))
    allowed = (COMMON_KEYS | SCENARIO_KEYS[scen] | EXPERIMENT_KEYS[exp])
    mult_name = None
    if exp in MULTIPLIER_EXPERIMENTS:
        mult_name = cfg.get("multiplier")
        if mult_name is None:
            raise ConfigError("experiment %r needs a multiplier" % exp)
        if mult_name not in MULTIPLIER_KEYS:
            raise ConfigError("unknown multiplier %r; known: %s"
                              % (mult_name,
                                 ", ".join(sorted(MULTIPLIER_KEYS))))
        allowed |= MULTIPLIER_KEYS[mult_name]
    out = {}
    for k, v in cfg.items():
        if k not in allowed:
            raise ConfigError("key %r is not part of experiment %r "
                              "(allowed: %s)"
                              % (k, exp, ", ".join(sorted(allowed))))
        if k in ("experiment", "scenario", "multiplier"):
            out[k] = v
        else:
            out[k] = _CHECKS[k](v)
    if scen != "graph_file":
        if "n_points" not in out:
            raise ConfigError("scenario %r needs n_points" % scen)
        if "spacing" in out and "domain_length" in out:
            raise ConfigError("give spacing or domain_length, not both")
    else:
        if "path" not in out:
            raise ConfigError("scenario graph_file needs path")
    if exp == "riesz_sweep":
        if scen == "graph_file":
            raise ConfigError("riesz_sweep needs a resolution family; "
                              "graph_file has a single fixed space")
        if "cutoff_fractions" in out and "cutoffs" in out:
            raise ConfigError("give cutoff_fractions or cutoffs, not both")
        for key in ("p", "q", "deltas"):
            if key not in out:
                raise ConfigError("riesz_sweep needs %s" % key)
        if len(out["n_points"]) < 3:
            raise ConfigError("riesz_sweep needs at least 3 resolutions")
    if "t_min" in out and "t_max" in out and out["t_max"] <= out["t_min"]:
        raise ConfigError("t_max must exceed t_min")
    if "lam_min" in out and "lam_max" in out \
            and out["lam_max"] <= out["lam_min"]:
        raise ConfigError("lam_max must exceed lam_min")
    if "j_min" in out and "j_max" in out and out["j_max"] < out["j_min"]:
        raise ConfigError("j_max must be >= j_min")
    return out


def build_multiplier(cfg):
    from . import multiplier as mult

    name = cfg["multiplier"]
    if name == "constant":
        return mult.constant(cfg.get("multiplier_value", 1.0))
    if name == "indicator":
        return mult.indicator(cfg.get("multiplier_r", 1.0))
    if name == "bochner_riesz":
        return mult.bochner_riesz(cfg.get("multiplier_r", 1.0),
                                  cfg.get("multiplier_delta", 1.0))
    if name == "gaussian":
        return mult.gaussian(cfg.get("multiplier_width", 1.0))
    if name == "sinc":
        return mult.sinc(cfg.get("multiplier_rho", 1.0))
    if name == "table":
        return mult.from_table(cfg["multiplier_file"])
    raise ConfigError("unknown multiplier %r" % name)
