#! /usr/bin/env python3

import argparse
import sys
from typing import Any

import numpy as np
from tabulate import tabulate

from stability_lab.algebra import Algebra, Element
from stability_lab.config import ConfigError, build_maps, build_space, load_config
from stability_lab.direct_method import UnsupportedExponent, direct_limit
from stability_lab.experiments import load_experiments
from stability_lab.runner import run
from stability_lab.util import dump_json_string, err, info, str_to_point
from stability_lab.validation import SchemaValidationError

COUNTEREXAMPLES = ["luminet", "nilpotent"]


class IncorrectInput(ConfigError):
    pass


def run_experiment(args: Any) -> None:
    cfg = load_config(args.config, seed=args.seed)
    sys.exit(run(cfg, not args.no_timestamp, args.out, args.format))


def run_counterexample(args: Any) -> None:
    cfg = load_config(args.name, seed=args.seed)
    sys.exit(run(cfg, not args.no_timestamp, args.out, args.format))


def list_experiments(args: Any) -> None:
    rows = [
        [e.name, e.theorem, e.description] for e in load_experiments().values()
    ]
    info(tabulate(rows, headers=["experiment", "result", "description"]))


def trace_limit(args: Any) -> None:
    cfg = load_config(args.config, seed=args.seed)
    _, f = build_maps(cfg, cfg.noise_amplitude())
    coords = args.point
    if len(coords) != f.domain.dim:
        raise IncorrectInput(
            f"Point {coords} has {len(coords)} coordinates, "
            f"{f.domain.space_id} needs {f.domain.dim}"
        )
    trace = direct_limit(f, Element(f.domain, np.array(coords)), cfg.schedule())
    print(dump_json_string(trace.to_json()), end="")
    if not trace.converged:
        err(f"No limit: {trace.verdict.describe()}")


def describe_algebra(args: Any) -> None:
    space = build_space(args.spec, args.seed)
    info(space.describe())
    if isinstance(space, Algebra):
        rows = [[i, label] for i, label in enumerate(space.basis_labels)]
        info(tabulate(rows, headers=["index", "basis element"]))


def add_report_flags(parser: Any) -> None:
    parser.add_argument(
        "--format",
        choices=["json", "csv"],
        help="Report format. Defaults to the config's format.",
    )
    parser.add_argument(
        "--out",
        help="Write the report to this path instead of the config's output.",
    )
    parser.add_argument(
        "--no-timestamp",
        action="store_true",
        help="Leave generated_at out of the report so reruns are byte-identical.",
    )


def add_seed_flag(parser: Any) -> None:
    parser.add_argument("--seed", type=int, help="Override the config seed.")


# Allow newlines in help texts that starts with the R| marker
# format as usual otherwise
class ArgFormatter(argparse.HelpFormatter):
    def _split_lines(self, text: str, width: int) -> list[str]:
        if text.startswith("R|"):
            return text[2:].splitlines()
        return argparse.HelpFormatter._split_lines(self, text, width)


PARSER = argparse.ArgumentParser(
    prog="python -m stability_lab",
    description="Numerical checks of Hyers-Ulam-Rassias stability for n-ring "
    "homomorphisms and derivations.",
    formatter_class=ArgFormatter,
)
PARSER.add_argument("--debug", action="store_true", help="Run in debugging mode.")

SUBPARSERS = PARSER.add_subparsers()


def add_subparser(*args, **kwargs) -> argparse.ArgumentParser:  # type: ignore
    return SUBPARSERS.add_parser(
        *args,
        **kwargs,
        formatter_class=ArgFormatter,
    )


RUN_PARSER = add_subparser(
    "run",
    help=(
        "R|Run an experiment and report every checked bound.\n"
        "- Exit 0 when every asserted bound holds, 1 when one fails.\n"
        "- Exit 2 on an invalid config or an unsupported exponent.\n"
    ),
)
RUN_PARSER.set_defaults(func=run_experiment)
RUN_PARSER.add_argument("config", help="Catalog experiment name or config file path.")
add_report_flags(RUN_PARSER)
add_seed_flag(RUN_PARSER)

LIST_PARSER = add_subparser("list", help="List the experiment catalog.")
LIST_PARSER.set_defaults(func=list_experiments)

COUNTEREXAMPLE_PARSER = add_subparser(
    "counterexample", help="Reproduce one of the counterexamples."
)
COUNTEREXAMPLE_PARSER.set_defaults(func=run_counterexample)
COUNTEREXAMPLE_PARSER.add_argument("name", choices=COUNTEREXAMPLES)
add_report_flags(COUNTEREXAMPLE_PARSER)
add_seed_flag(COUNTEREXAMPLE_PARSER)

LIMIT_PARSER = add_subparser(
    "limit", help="Print the direct-method iteration trace at a point."
)
LIMIT_PARSER.set_defaults(func=trace_limit)
LIMIT_PARSER.add_argument(
    "point",
    type=str_to_point,
    help="A number, or a YAML list of coordinates such as '[1, 0, 0, 1]'.",
)
LIMIT_PARSER.add_argument(
    "--config",
    default="hyers-hom",
    help="Config whose map is iterated. Defaults to hyers-hom.",
)
add_seed_flag(LIMIT_PARSER)

ALGEBRA_PARSER = add_subparser(
    "algebra",
    help="Describe an algebra specifier: real, matrix:K, nilpotent-ut4 or a file.",
)
ALGEBRA_PARSER.set_defaults(func=describe_algebra)
ALGEBRA_PARSER.add_argument("spec")
ALGEBRA_PARSER.add_argument("--seed", type=int, default=0)

if __name__ == "__main__":
    try:
        args = PARSER.parse_args()

        if "func" not in args:
            err("Missing positional argument, I do not know what to do")
            PARSER.print_help()
            sys.exit(1)

        try:
            args.func(args)
        except (ConfigError, SchemaValidationError, UnsupportedExponent) as e:
            if args.debug:
                raise e
            err(f"Error: {e}")
            sys.exit(2)
        except Exception as e:
            if args.debug:
                raise e
            err(f"Error: {e}")
            err("(Tip: Use the --debug flag to get a full stack trace.)")
            sys.exit(1)
    except argparse.ArgumentError as e:
        err(f"Error while parsing command line arguments: {e}")
        sys.exit(1)
