"""Command-line front end.

Subcommands: generate, train, reduce-sweep, accept-eval, online-eval,
threshold-sweep, bench.  Configuration comes from an optional JSON config
file plus kebab-case flag overrides.  Exit codes: 0 on success, 2 on
configuration errors, 3 on numerical failures.
"""

from __future__ import annotations

import argparse
import sys

from .gp import FactorizationError, NumericalError, OptimizationError
from .harness import (
    ConfigError,
    ExperimentConfig,
    cmd_accept_eval,
    cmd_bench,
    cmd_generate,
    cmd_online_eval,
    cmd_reduce_sweep,
    cmd_threshold_sweep,
    cmd_train,
    format_records,
)
from .systems import SimulationError

_COMMANDS = {
    "generate": cmd_generate,
    "train": cmd_train,
    "reduce-sweep": cmd_reduce_sweep,
    "accept-eval": cmd_accept_eval,
    "online-eval": cmd_online_eval,
    "threshold-sweep": cmd_threshold_sweep,
    "bench": cmd_bench,
}


def _comma_list(text: str) -> tuple:
    return tuple(part.strip() for part in text.split(",") if part.strip())


def _comma_ints(text: str) -> tuple:
    return tuple(int(part) for part in _comma_list(text))


def _comma_floats(text: str) -> tuple:
    return tuple(float(part) for part in _comma_list(text))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="budgetgp",
        description="Budget-constrained online GP experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", help="JSON config file; flags override its values")
        p.add_argument("--benchmark", help="benchmark id (e.g. rastrigin, van-der-pol, csv)")
        p.add_argument("--criterion", type=_comma_list, dest="criteria",
                       help="comma list of criteria (prior-entropy, predictive-entropy, "
                            "mean-relevance, mll, lpd)")
        p.add_argument("--budget", type=int, help="datapoint budget N_max")
        p.add_argument("--var-threshold", type=float, help="variance insertion threshold")
        p.add_argument("--err-threshold", type=float, help="error insertion threshold")
        p.add_argument("--accept", action="store_true", dest="use_acceptance",
                       default=None, help="enable the acceptance criterion")
        p.add_argument("--seeds", type=_comma_ints, help="comma list of seeds")
        p.add_argument("--initial-train", type=int, help="initial training sample size")
        p.add_argument("--stream-size", type=int, help="streamed point count override")
        p.add_argument("--eval-size", type=int, help="evaluation set size")
        p.add_argument("--data-file", help="CSV path for the csv benchmark")
        p.add_argument("--target-column", help="target column for the csv benchmark")
        p.add_argument("--hyper-file", help="persisted hyperparameter file to reuse")
        p.add_argument("--train-restarts", type=int, help="extra optimizer restarts")
        p.add_argument("--train-iters", type=int, dest="train_max_iters",
                       help="optimizer iteration cap")
        p.add_argument("--thresholds", type=_comma_floats, dest="thresholds_grid",
                       help="comma list of error thresholds for threshold-sweep")
        p.add_argument("--reduce-min-size", type=int, help="stop size for reduce-sweep")
        p.add_argument("--repeats", type=int, dest="bench_repeats",
                       help="timing repetitions for bench")
        p.add_argument("--mr-reference", choices=("model", "target"),
                       help="mean-relevance reference: model mean or stored target")
        p.add_argument("--maps", action="store_true", default=None,
                       help="emit spatial selection map CSVs (2-D function benchmarks)")
        p.add_argument("--verify", action="store_true", default=None,
                       help="enable the shadow-oracle verification in reduce-sweep")
        p.add_argument("--out", help="output path for results (.csv or .json)")
    return parser


def build_config(args: argparse.Namespace) -> ExperimentConfig:
    config = (
        ExperimentConfig.from_file(args.config)
        if args.config
        else ExperimentConfig()
    )
    for key, value in vars(args).items():
        if key in ("command", "config") or value is None:
            continue
        setattr(config, key, value)
    return config


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = build_config(args)
        records = _COMMANDS[args.command](config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (FactorizationError, NumericalError, OptimizationError, SimulationError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    print(format_records(records), end="")
    if config.out:
        print(f"results written to {config.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
