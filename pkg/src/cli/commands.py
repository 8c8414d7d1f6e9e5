"""Subcommand handlers mapping pipeline outcomes to exit codes.

Exit codes:
    0: success
    1: a symmetry check failed
    2: invalid configuration, checkpoint or table request
    3: training diverged (partial history saved)
"""

import argparse
import json
import logging
import sys
from pathlib import Path

from pydantic import ValidationError

from src.autodiff import AutodiffError
from src.cli.config import ExperimentConfig, apply_overrides, load_config
from src.cli.pipeline import run_checks, run_experiment, wigner_tables
from src.harmonics import HarmonicsError
from src.irreps import IrrepsError
from src.models import RunStatus
from src.network import CheckpointError, NetworkError
from src.scenarios import ScenarioError
from src.symmetry import SymmetryError
from src.training import DivergenceError, TrainingError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_INVALID = 2
EXIT_DIVERGED = 3

# Base error of every subpackage.
DOMAIN_ERRORS = (
    IrrepsError,
    HarmonicsError,
    AutodiffError,
    NetworkError,
    CheckpointError,
    SymmetryError,
    TrainingError,
    ScenarioError,
)


def _fail(message: str, code: int) -> int:
    logger.error(message)
    print(message, file=sys.stderr)
    return code


def _load(args: argparse.Namespace) -> ExperimentConfig:
    config = load_config(Path(args.config))
    return apply_overrides(config, seed=args.seed, output_dir=args.out, grid_res=args.grid_res)


def cmd_run(args: argparse.Namespace) -> int:
    """Train or discover as configured and write result files."""
    try:
        config = _load(args)
    except (OSError, json.JSONDecodeError, ValidationError) as e:
        return _fail(f"Invalid configuration {args.config}: {e}", EXIT_INVALID)

    try:
        results = run_experiment(config)
    except DivergenceError as e:
        return _fail(f"Training diverged: {e}", EXIT_DIVERGED)
    except DOMAIN_ERRORS as e:
        return _fail(f"Cannot run {config.scenario.id}: {e}", EXIT_INVALID)

    logger.info("Run finished: final mse %s", results.final_mse)
    return EXIT_OK


def cmd_check(args: argparse.Namespace) -> int:
    """Run the symmetry checks; nonzero exit if any fails."""
    try:
        config = _load(args)
    except (OSError, json.JSONDecodeError, ValidationError) as e:
        return _fail(f"Invalid configuration {args.config}: {e}", EXIT_INVALID)

    try:
        report = run_checks(config)
    except CheckpointError as e:
        return _fail(f"Unusable checkpoint: {e}", EXIT_INVALID)
    except DOMAIN_ERRORS as e:
        return _fail(f"Cannot check {config.scenario.id}: {e}", EXIT_INVALID)

    if report.status is RunStatus.CHECKS_FAILED:
        failed = ", ".join(c.name for c in report.checks if not c.passed)
        return _fail(f"Symmetry checks failed: {failed}", EXIT_CHECK_FAILED)
    return EXIT_OK


def cmd_tables(args: argparse.Namespace) -> int:
    """Dump 3j and D tables as JSON to stdout or ``--out``."""
    if args.l is None and args.d is None:
        return _fail("Nothing to dump: pass --l L1 L2 L3 and/or --d L", EXIT_INVALID)
    try:
        tables = wigner_tables(
            degrees=tuple(args.l) if args.l is not None else None,
            d_degree=args.d,
            rotation=tuple(args.rotvec),
            inversion=args.inversion,
        )
    except IrrepsError as e:
        return _fail(f"Invalid table request: {e}", EXIT_INVALID)

    text = json.dumps(tables, indent=1) + "\n"
    if args.out is not None:
        path = Path(args.out)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK
