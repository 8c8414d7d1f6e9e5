"""Main entry point.

Subcommands:
    run     train or discover order parameters, write result files
    check   run the symmetry checks on a fresh or checkpointed model
    tables  dump Wigner 3j / D tables as JSON

Environment variables are loaded from a .env file.

    python -m src.main run --config experiments/square_to_rect.json
"""

import argparse
import logging
import sys
from pathlib import Path

from dotenv import load_dotenv

# Load environment variables before any other imports
load_dotenv()

from src.cli import cmd_check, cmd_run, cmd_tables, get_runtime_settings  # noqa: E402

logging.basicConfig(
    level=get_runtime_settings().log_level,
    format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    handlers=[logging.StreamHandler(sys.stdout)],
)
logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="order-params",
        description="Equivariant networks and symmetry-breaking order parameters",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    for name, handler, help_text in (
        ("run", cmd_run, "train or discover order parameters"),
        ("check", cmd_check, "run the symmetry checks"),
    ):
        sub = commands.add_parser(name, help=help_text)
        sub.add_argument("--config", required=True, type=Path, help="experiment JSON file")
        sub.add_argument("--out", type=Path, default=None, help="output directory override")
        sub.add_argument("--seed", type=int, default=None, help="root seed override")
        sub.add_argument("--grid-res", type=int, default=None, help="sphere grid resolution")
        sub.set_defaults(handler=handler)

    tables = commands.add_parser("tables", help="dump Wigner 3j / D tables")
    tables.add_argument("--l", type=int, nargs=3, metavar=("L1", "L2", "L3"), default=None)
    tables.add_argument("--d", type=int, default=None, metavar="L", help="degree of a D matrix")
    tables.add_argument(
        "--rotvec", type=float, nargs=3, default=(0.0, 0.0, 0.0), help="rotation vector for --d"
    )
    tables.add_argument(
        "--inversion", action="store_true", help="compose the D matrix with inversion"
    )
    tables.add_argument("--out", type=Path, default=None, help="write to a file instead of stdout")
    tables.set_defaults(handler=cmd_tables)
    return parser


def main(argv: list[str] | None = None) -> int:
    """Parse arguments and dispatch to the subcommand."""
    args = build_parser().parse_args(argv)
    logger.debug("Running %s", args.command)
    return args.handler(args)


if __name__ == "__main__":
    sys.exit(main())
