"""Batch driver: configuration, pipelines and subcommands.

Responsibilities:
    - ExperimentConfig / RuntimeSettings: validated JSON experiment files and
      environment settings
    - run_experiment / run_checks / wigner_tables: pipelines writing result
      files and a hashed manifest
    - cmd_run / cmd_check / cmd_tables: exit-code mapping for ``src.main``
"""

from src.cli.commands import (
    EXIT_CHECK_FAILED,
    EXIT_DIVERGED,
    EXIT_INVALID,
    EXIT_OK,
    cmd_check,
    cmd_run,
    cmd_tables,
)
from src.cli.config import (
    SCHEMA_VERSION,
    SUB_SEEDS,
    CheckName,
    ExperimentConfig,
    Mode,
    PerovskiteScenario,
    RuntimeSettings,
    SquareScenario,
    apply_overrides,
    derive_seeds,
    get_runtime_settings,
    load_config,
)
from src.cli.pipeline import (
    build_model,
    build_task,
    run_checks,
    run_experiment,
    wigner_tables,
    write_manifest,
)

__all__ = [
    "EXIT_CHECK_FAILED",
    "EXIT_DIVERGED",
    "EXIT_INVALID",
    "EXIT_OK",
    "SCHEMA_VERSION",
    "SUB_SEEDS",
    "CheckName",
    "ExperimentConfig",
    "Mode",
    "PerovskiteScenario",
    "RuntimeSettings",
    "SquareScenario",
    "apply_overrides",
    "build_model",
    "build_task",
    "cmd_check",
    "cmd_run",
    "cmd_tables",
    "derive_seeds",
    "get_runtime_settings",
    "load_config",
    "run_checks",
    "run_experiment",
    "wigner_tables",
    "write_manifest",
]
