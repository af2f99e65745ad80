"""Command line entry point: ``zomax run|compare|mvi <config>`` and ``zomax plan <setting>``."""

from __future__ import annotations

import argparse
import logging
import sys
from collections.abc import Sequence

from pydantic import ValidationError

from zomax.config import get_settings
from zomax.diagnostics.planning import PLANNERS
from zomax.errors import (
    ConfigFileError,
    ConfigurationError,
    DimensionMismatchError,
    InfeasiblePlanError,
    InfeasibleStartError,
    ZomaxError,
)
from zomax.harness import compare_study, mvi_study, run_experiment
from zomax.log import configure_logging

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CONFIG = 2

INTEGER_PARAMS = {"d"}


def parse_plan_params(items: Sequence[str]) -> dict[str, float | int]:
    params: dict[str, float | int] = {}
    for item in items:
        key, sep, value = item.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ConfigurationError(f"expected key=value, got {item!r}")
        try:
            params[key] = int(value) if key in INTEGER_PARAMS else float(value)
        except ValueError as exc:
            raise ConfigurationError(f"{key}: not a number: {value!r}") from exc
    return params


def _plan(args: argparse.Namespace) -> int:
    params = parse_plan_params(args.params)
    try:
        plan = PLANNERS[args.setting](**params)
    except TypeError as exc:
        raise ConfigurationError(f"bad parameters for {args.setting}: {exc}") from exc
    print(plan.model_dump_json(indent=2))
    return EXIT_OK


def _run(args: argparse.Namespace) -> int:
    result = run_experiment(args.config)
    print(result.output_dir)
    return EXIT_OK


def _compare(args: argparse.Namespace) -> int:
    print(compare_study(args.config))
    return EXIT_OK


def _mvi(args: argparse.Namespace) -> int:
    result = mvi_study(args.config)
    print(result.report.model_dump_json(indent=2))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="zomax", description="Zeroth-order extragradient experiments for min-max problems."
    )
    parser.add_argument("--log-level", default=None, help="Overrides ZOMAX_LOG_LEVEL.")
    commands = parser.add_subparsers(dest="command", required=True)

    for name, handler, help_text in (
        ("run", _run, "Run every seed of an experiment file."),
        ("compare", _compare, "Run the [variant.*] sections and write comparison tables."),
        ("mvi", _mvi, "Sample the proximal MVI functional around a candidate point."),
    ):
        sub = commands.add_parser(name, help=help_text)
        sub.add_argument("config", help="Path to the INI experiment file.")
        sub.set_defaults(handler=handler)

    plan = commands.add_parser("plan", help="Print step sizes, mu, N and t for a target epsilon.")
    plan.add_argument("setting", choices=sorted(PLANNERS))
    plan.add_argument("params", nargs="*", metavar="key=value")
    plan.set_defaults(handler=_plan)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level or get_settings().log_level)
    try:
        return args.handler(args)
    except (
        ConfigFileError,
        ConfigurationError,
        DimensionMismatchError,
        InfeasiblePlanError,
        InfeasibleStartError,
        ValidationError,
    ) as exc:
        logger.error("configuration error: %s", exc)
        return EXIT_CONFIG
    except (ZomaxError, FileNotFoundError) as exc:
        logger.error("run failed: %s", exc)
        return EXIT_RUNTIME


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
