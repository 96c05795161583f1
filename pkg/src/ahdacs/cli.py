"""Command-line entry point.

    ahdacs run   [--config FILE] [overrides...]
    ahdacs sweep [--config FILE] [overrides...] [--fraction F ...]

Exit status: 0 success, 2 configuration error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys

import yaml

from .experiment import DEFAULT_SWEEP, ConfigError, ExperimentConfig, mean_by_fraction, run_experiment, sweep_threshold

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3

# flag dest -> config key
_OVERRIDES = {
    "field": "field",
    "nodes": "nodes",
    "branching": "branching",
    "levels": "levels",
    "fraction": "fractions",
    "protocol": "protocols",
    "seed": "seed",
    "reps": "reps",
    "out": "out",
    "extent": "extent",
    "bump_count": "bump_count",
    "base": "base",
    "noise_variance": "noise_variance",
    "power_control": "power_control",
    "radio_range": "radio_range",
    "jobs": "jobs",
}


def _add_common(p):
    p.add_argument("--config", help="YAML file with ExperimentConfig keys")
    p.add_argument("--field", choices=["piecewise", "gaussian-bumps"])
    p.add_argument("--nodes", type=int, nargs="+", help="network sizes")
    p.add_argument("--branching", type=int, help="clusters per parent (n)")
    p.add_argument("--levels", type=int, help="hierarchy depth (T)")
    p.add_argument("--fraction", type=float, nargs="+", help="DCT truncation fraction(s)")
    p.add_argument("--protocol", nargs="+", choices=["ahdacs", "hdacs"])
    p.add_argument("--seed", type=int)
    p.add_argument("--reps", type=int)
    p.add_argument("--out")
    p.add_argument("--extent", type=float)
    p.add_argument("--bump-count", dest="bump_count", type=int)
    p.add_argument("--base", type=float, help="constant level of the bump field")
    p.add_argument("--noise-variance", dest="noise_variance", type=float)
    p.add_argument("--power-control", dest="power_control", choices=["fixed", "adaptive"])
    p.add_argument("--radio-range", dest="radio_range", type=float)
    p.add_argument("--jobs", type=int)


def build_parser():
    parser = argparse.ArgumentParser(prog="ahdacs", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run protocols over a size/fraction grid and write CSVs")
    _add_common(run)
    sweep = sub.add_parser("sweep", help="root MSE versus truncation fraction")
    _add_common(sweep)
    return parser


def load_config(args):
    data = {}
    if args.config:
        with open(args.config) as fh:
            loaded = yaml.safe_load(fh) or {}
        if not isinstance(loaded, dict):
            raise ConfigError("config", "top level must be a mapping")
        data.update(loaded)
    for dest, key in _OVERRIDES.items():
        value = getattr(args, dest, None)
        if value is not None:
            data[key] = value
    if args.command == "sweep" and "fractions" not in data:
        data["fractions"] = list(DEFAULT_SWEEP)
    if args.command == "sweep" and "protocols" not in data:
        data["protocols"] = ["ahdacs"]
    try:
        return ExperimentConfig.from_dict(data)
    except TypeError as exc:
        raise ConfigError("config", str(exc)) from exc


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args)
    except ConfigError as exc:
        print(f"ahdacs: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, yaml.YAMLError) as exc:
        print(f"ahdacs: cannot read config: {exc}", file=sys.stderr)
        return EXIT_CONFIG if isinstance(exc, yaml.YAMLError) else EXIT_IO
    try:
        if args.command == "run":
            summary = run_experiment(config)
            for r in summary["energy_ratio"]:
                print(f"nodes={r['nodes']} fraction={r['fraction']} ahdacs/hdacs energy={r['ratio']:.4f}")
        else:
            rows = sweep_threshold(config, config.fractions)
            for (proto, frac), m in mean_by_fraction(rows).items():
                print(f"{proto} fraction={frac} root_mse={m:.6g}")
    except ConfigError as exc:
        print(f"ahdacs: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"ahdacs: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    print(json.dumps({"out": config.out, "config": config.fingerprint()}))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
