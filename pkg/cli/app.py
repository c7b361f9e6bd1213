import sys
import json
import argparse
from typing import List, Optional

from pydantic import ValidationError

from cli.commands import COMMANDS
from core.errors import CurvflowError, InvalidArgumentError
from utils.config import settings
from utils.logger import get_logger

logger = get_logger("cli")

EXIT_INPUT_ERROR = 3

EPILOG = """exit codes:
  0  success, or verdict "yes"
  1  verdict "no" (violation found)
  2  verdict "hypotheses-not-met" or "vacuous"
  3  input or usage error
"""


class CommandParser(argparse.ArgumentParser):
    """Raises on usage errors so they map to the input-error exit code."""

    def error(self, message: str):
        raise InvalidArgumentError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = CommandParser(
        prog="curvflow",
        description="Bakry-Emery curvature, heat and nonlinear flows on weighted graphs, and theorem checks",
        epilog=EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    subparsers = parser.add_subparsers(dest="command", metavar="<command>")
    subparsers.required = True
    for command in COMMANDS:
        command.register(subparsers)
    return parser


def run(argv: Optional[List[str]] = None) -> int:
    """Execute one subcommand and return its exit code."""
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
        logger.debug("Running", command=args.command, environment=settings.environment)
        return args.handler(args)
    except SystemExit as e:
        # --help and --version
        return int(e.code or 0)
    except (CurvflowError, ValidationError, json.JSONDecodeError, OSError, ValueError) as e:
        logger.error(f"Input error: {e}")
        print(f"curvflow: error: {e}", file=sys.stderr)
        return EXIT_INPUT_ERROR
