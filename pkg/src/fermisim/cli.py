"""Command-line entry point.

    fermisim run --experiment fig3 --steps 8 --noise paper --seed 42 \
        --out results/
    fermisim sweep --experiment fig3 --axis steps --from 1 --to 8 \
        --out results/

Exit codes: 0 on success, 2 on configuration errors, 3 on numerical
failures (fit or reconstruction breakdowns).
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .benchmarking import ClosureError, FitError
from .experiments import (
    EXPERIMENT_IDS,
    ConfigError,
    ExperimentConfig,
    run,
    sweep,
)
from .tomography import ReconstructionError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _parse_noise(text: str) -> float | None:
    if text == "off":
        return None
    if text == "paper":
        return 1.0
    try:
        return float(text)
    except ValueError:
        raise ConfigError(
            f"noise: expected 'off', 'paper', or a scale factor, got {text!r}"
        ) from None


def _build_config(args) -> ExperimentConfig:
    payload = {}
    if args.config:
        with open(args.config, encoding="ascii") as fh:
            payload = json.load(fh)
    if args.experiment is not None:
        payload["experiment"] = args.experiment
    if args.out is not None:
        payload["out_dir"] = args.out
    if args.steps is not None:
        payload["steps"] = args.steps
    if args.noise is not None:
        payload["noise_scale"] = _parse_noise(args.noise)
    if args.seed is not None:
        payload["seed"] = args.seed
    if args.ordering is not None:
        payload["ordering"] = args.ordering
    if "experiment" not in payload:
        raise ConfigError("experiment: required (flag or config file)")
    if "out_dir" not in payload:
        raise ConfigError("out_dir: required (--out or config file)")
    return ExperimentConfig.from_json_dict(payload)


def _add_common(parser) -> None:
    parser.add_argument("--experiment", choices=EXPERIMENT_IDS)
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--steps", type=int)
    parser.add_argument("--noise", help="off | paper | <scale factor>")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--ordering", choices=["s5", "s6"])
    parser.add_argument("--config", help="JSON config file to merge")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fermisim",
        description="Fermionic-model circuit compilation and verification "
                    "experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    run_p = sub.add_parser("run", help="run one experiment")
    _add_common(run_p)
    sweep_p = sub.add_parser("sweep", help="run an experiment over one axis")
    _add_common(sweep_p)
    sweep_p.add_argument("--axis", required=True,
                         choices=["steps", "noise_scale", "ordering"])
    sweep_p.add_argument("--from", dest="from_", type=float)
    sweep_p.add_argument("--to", dest="to", type=float)
    sweep_p.add_argument("--values", nargs="+",
                         help="explicit axis values (overrides --from/--to)")
    return parser


def _sweep_values(args):
    if args.values:
        if args.axis == "ordering":
            return list(args.values)
        caster = int if args.axis == "steps" else float
        return [caster(v) for v in args.values]
    if args.axis == "ordering":
        return ["s5", "s6"]
    if args.from_ is None or args.to is None:
        raise ConfigError("axis: need --values or --from/--to")
    if args.axis == "steps":
        return list(range(int(args.from_), int(args.to) + 1))
    return [args.from_, args.to]


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _build_config(args)
        if args.command == "run":
            summary = run(config)
            print(json.dumps({"experiment": config.experiment,
                              "out_dir": config.out_dir,
                              "ok": True}, sort_keys=True))
        else:
            values = _sweep_values(args)
            sweep(config, args.axis, values)
            print(json.dumps({"experiment": config.experiment,
                              "axis": args.axis,
                              "values": [str(v) for v in values],
                              "ok": True}, sort_keys=True))
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (FitError, ReconstructionError, ClosureError,
            np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
