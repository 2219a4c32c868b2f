"""Command line front end: run experiments, list scenarios, validate.

Exit codes: 0 success, 2 configuration problems.  A run with failed
cells still exits 0; the failures are in the report, and partial
sweeps are a normal outcome worth keeping.
"""

import argparse
import os
import sys

from . import __version__
from .config import ConfigError, load_config, validate_config
from .scenarios import list_scenarios


def _cmd_run(args):
    from .experiments import run_experiment

    cfg = load_config(args.config)
    if args.seed is not None:
        cfg["seed"] = args.seed
    out_dir = args.out or cfg.get("out") \
        or os.path.splitext(os.path.basename(args.config))[0] + "_out"
    threads = args.threads or cfg.get("threads", 1)
    report = run_experiment(cfg, out_dir, threads=threads)
    sys.stdout.write(report.to_text())
    return 0


def _cmd_list_scenarios(_args):
    for name, doc in list_scenarios():
        print("%-20s %s" % (name, doc))
    return 0


def _cmd_validate(args):
    cfg = load_config(args.config)
    normalized = validate_config(cfg)
    print("config ok: experiment=%s scenario=%s (%d keys)"
          % (normalized["experiment"], normalized["scenario"],
             len(normalized)))
    return 0


def build_parser():
    ap = argparse.ArgumentParser(
        prog="specmult",
        description="spectral multiplier experiments on discretized "
                    "metric measure spaces")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute an experiment config")
    run.add_argument("config", help="path to a YAML config file")
    run.add_argument("--seed", type=int, default=None,
                     help="override the config seed (unsigned 64-bit)")
    run.add_argument("--out", default=None,
                     help="output directory (default: <config stem>_out)")
    run.add_argument("--threads", type=int, default=None,
                     help="worker threads for sweep cells")
    run.set_defaults(fn=_cmd_run)

    ls = sub.add_parser("list-scenarios", help="show the scenario catalog")
    ls.set_defaults(fn=_cmd_list_scenarios)

    val = sub.add_parser("validate", help="check a config without running")
    val.add_argument("config", help="path to a YAML config file")
    val.set_defaults(fn=_cmd_validate)
    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    if getattr(args, "seed", None) is not None and args.seed < 0:
        ap.error("--seed must be a nonnegative integer")
    try:
        return args.fn(args)
    except ConfigError as exc:
        print("config error: %s" % exc, file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print("file not found: %s" % exc, file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
