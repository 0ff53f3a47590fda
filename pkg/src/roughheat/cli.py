"""Command-line front end for the experiment harness.

    roughheat <experiment> [--config file.ini] [--H 0.3] [--theta 1.0]
              [--sigma one] [--N 1024] [--paths 200] [--seed 0]
              [--workers 1] [--out DIR] [--format csv|json] [--source ...]

Flags override config-file values; the default output directory comes from
the ROUGHHEAT_OUT environment variable (falling back to ./roughheat-out).
Exit status: 0 pass, 1 tolerance failure, 2 bad configuration, 3 abort rate
above 5%.
"""

import argparse
import ast
import configparser
import os
import sys

from .constants import ModelParams
from .harness import EXIT_CONFIG, EXPERIMENTS, ConfigError, ExperimentConfig, run

_NUMERIC_KEYS = {
    "N", "source", "kernel", "L", "n_modes", "dt", "t_end", "record_stride",
    "probes", "decay_N_list", "trend_N_list", "estimators", "eps_min_log2",
    "eps_max_log2", "n_dyadic", "phi", "a_list", "b_list", "t_list", "rel_tol",
    "t_anchor", "eps_steps", "n_anchors", "u0_amplitude", "sigma_parameters",
    "n_triples",
}


def _parse_value(text):
    try:
        return ast.literal_eval(text)
    except (ValueError, SyntaxError):
        return text


def _load_config_file(path):
    parser = configparser.ConfigParser()
    parser.optionxform = str    # keys like H and N are case-significant
    if not parser.read(path):
        raise ConfigError(f"cannot read config file {path!r}")
    out = {"model": {}, "numeric": {}, "mc": {}, "output": {}, "tolerances": {}}
    for section in parser.sections():
        if section not in out:
            raise ConfigError(f"unknown config section [{section}]")
        for key, val in parser[section].items():
            out[section][key] = _parse_value(val)
    return out


def build_config(experiment, args):
    file_cfg = _load_config_file(args.config) if args.config else \
        {"model": {}, "numeric": {}, "mc": {}, "output": {}, "tolerances": {}}

    model_kw = dict(file_cfg["model"])
    if args.H is not None:
        model_kw["H"] = args.H
    if args.theta is not None:
        model_kw["theta"] = args.theta
    if args.sigma is not None:
        model_kw["sigma"] = args.sigma
    if args.u0 is not None:
        model_kw["u0"] = args.u0
    model_kw.setdefault("H", 0.3)
    try:
        model = ModelParams(**model_kw)
    except (TypeError, ValueError) as err:
        raise ConfigError(str(err)) from err

    numeric = dict(file_cfg["numeric"])
    for key, val in vars(args).items():
        if key in _NUMERIC_KEYS and val is not None:
            numeric[key] = val
    unknown = set(numeric) - _NUMERIC_KEYS
    if unknown:
        raise ConfigError(f"unknown numeric keys: {sorted(unknown)}")

    mc = dict(file_cfg["mc"])
    out = dict(file_cfg["output"])
    out_dir = args.out or out.get("dir") \
        or os.environ.get("ROUGHHEAT_OUT", "roughheat-out")
    fmt = args.format or out.get("format", "csv")
    if fmt not in ("csv", "json"):
        raise ConfigError(f"unknown format {fmt!r}")
    formats = ("csv", "json") if fmt == "csv" else ("json",)

    return ExperimentConfig(
        experiment=experiment,
        model=model,
        numeric=numeric,
        n_paths=args.paths if args.paths is not None else int(mc.get("n_paths", 100)),
        root_seed=args.seed if args.seed is not None else int(mc.get("root_seed", 0)),
        workers=args.workers if args.workers is not None else int(mc.get("workers", 1)),
        out_dir=os.path.join(out_dir, experiment),
        formats=formats,
        tolerances=dict(file_cfg["tolerances"]),
    )


def make_parser():
    parser = argparse.ArgumentParser(
        prog="roughheat",
        description="Simulation and statistics for the heat equation driven "
                    "by rough spatial noise")
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="INI file with sections "
                       "[model] [numeric] [mc] [output] [tolerances]")
        p.add_argument("--H", type=float)
        p.add_argument("--theta", type=float)
        p.add_argument("--sigma")
        p.add_argument("--u0")
        p.add_argument("--N", type=int)
        p.add_argument("--paths", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--workers", type=int)
        p.add_argument("--out")
        p.add_argument("--format", choices=("csv", "json"))
        p.add_argument("--source", choices=("exact", "solver"))
    return parser


def main(argv=None):
    args = make_parser().parse_args(argv)
    try:
        config = build_config(args.experiment, args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    status = run(config)
    print(f"{args.experiment}: artifacts in {config.out_dir} (exit {status})")
    return status


if __name__ == "__main__":
    sys.exit(main())
