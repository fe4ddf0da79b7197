"""Command-line entry point: seqpt <command> [options]"""
import argparse
import sys
from typing import List, Optional

from loguru import logger

from pyseqpt import cmd_channel, cmd_design, cmd_estimate, cmd_plan, cmd_sweep, cmd_verify
from pyseqpt.config import FORMATS, RunConfig
from pyseqpt.exceptions import ConfigError, InvariantError

COMMANDS = {
    "design": (cmd_design, "Build the input design of a scheme"),
    "channel": (cmd_channel, "Write a standard channel file"),
    "plan": (cmd_plan, "Shots needed for a target accuracy"),
    "estimate": (cmd_estimate, "Estimate chi matrix elements"),
    "sweep": (cmd_sweep, "Empirical error against the shot count"),
    "verify": (cmd_verify, "Check the integral identities numerically"),
}

EXIT_CONFIG = 2
EXIT_INVARIANT = 3


def global_arguments() -> argparse.ArgumentParser:
    """Flags accepted by every subcommand"""
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument("--seed", type=int, default=0, help="Root seed of the run")
    parser.add_argument("-o", "--out", type=str, help="Output file, stdout when omitted")
    parser.add_argument(
        "-f", "--format", dest="fmt", type=str, choices=FORMATS, default="json", help="Output format"
    )
    parser.add_argument("--log-level", type=str, default="INFO", help="loguru level of stderr")
    return parser


def parse_arguments(argv: Optional[List[str]] = None) -> argparse.Namespace:
    """Parse arguments"""
    parser = argparse.ArgumentParser(prog="seqpt", description=__doc__)
    subparsers = parser.add_subparsers(dest="command", required=True)
    parent = global_arguments()
    for name, (module, description) in COMMANDS.items():
        sub = subparsers.add_parser(name, parents=[parent], help=description)
        module.add_arguments(sub)
    return parser.parse_args(argv)


def configure_logging(level: str) -> None:
    logger.remove()
    logger.add(sys.stderr, level=level.upper())


def run(argv: Optional[List[str]] = None) -> int:
    """
    Run one subcommand and return its exit code.

    0 on success, 2 on configuration errors, 3 when input data violates an invariant.
    """
    args = parse_arguments(argv)
    try:
        configure_logging(args.log_level)
    except ValueError as err:
        logger.add(sys.stderr)
        logger.error("Unknown log level '{}': {}", args.log_level, err)
        return EXIT_CONFIG

    module, _ = COMMANDS[args.command]
    try:
        config = RunConfig.from_namespace(args).validate()
        return module.main(config)
    except ConfigError as err:
        logger.error("{}", err)
        return EXIT_CONFIG
    except InvariantError as err:
        logger.error("{}", err)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(run())
