"""Experiment and runtime configuration.

ExperimentConfig is read from a JSON file and validated in full before any
computation; unknown keys anywhere are rejected. RuntimeSettings come from
the environment (``.env`` is loaded on import).
"""

import json
import os
from enum import Enum
from pathlib import Path
from typing import Annotated, Literal

import numpy as np
from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, field_validator

from src.harmonics import DEFAULT_GRID_RES
from src.network import ModelConfig
from src.scenarios import SlotChoice, TiltSpec
from src.training import TrainingConfig

load_dotenv()

SCHEMA_VERSION = 1
SUB_SEEDS = ("weights", "rotations", "checks")


class RuntimeSettings(BaseModel):
    """Process-level settings pulled from environment variables.

    Attributes:
        log_level: Root logging level.
        output_dir: Default directory for run outputs.
        grid_res: Default sphere grid resolution.
    """

    log_level: str = Field(default_factory=lambda: os.getenv("LOG_LEVEL", "INFO").upper())
    output_dir: Path = Field(
        default_factory=lambda: Path(os.getenv("ORDER_PARAMS_OUTPUT_DIR", "results"))
    )
    grid_res: int = Field(
        default_factory=lambda: int(os.getenv("ORDER_PARAMS_GRID_RES", str(DEFAULT_GRID_RES))),
        ge=8,
    )


def get_runtime_settings() -> RuntimeSettings:
    return RuntimeSettings()


class Mode(str, Enum):
    TRAIN = "train"
    DISCOVER = "discover"


class CheckName(str, Enum):
    EQUIVARIANCE = "equivariance"
    CURIE = "curie"
    COMBINATION = "combination"
    GRADIENT = "gradient"


class SquareScenario(BaseModel):
    """Square/rectangle deformation in either direction."""

    model_config = ConfigDict(extra="forbid")

    id: Literal["square_to_rect", "rect_to_square"]
    slot: SlotChoice = SlotChoice.FULL
    lambda_sparsity: float = Field(default=1e-2, ge=0)
    lambda_degree: float = Field(default=0.0, ge=0)


class PerovskiteScenario(BaseModel):
    """Perovskite tilt task on the 2x2x2 supercell."""

    model_config = ConfigDict(extra="forbid")

    id: Literal["perovskite"]
    tilt: TiltSpec = Field(default_factory=TiltSpec)
    constrained: bool = False
    slot_lmax: int = Field(default=5, ge=1, le=5)
    lambda_sparsity: float = Field(default=1e-2, ge=0)
    lambda_degree: float = Field(default=5e-3, ge=0)


Scenario = Annotated[SquareScenario | PerovskiteScenario, Field(discriminator="id")]


class ExperimentConfig(BaseModel):
    """One experiment: scenario, network, schedule, seeds and outputs.

    Attributes:
        schema_version: Must equal 1.
        scenario: Scenario parameters, selected by ``id``.
        model: Network hyperparameters.
        training: Optimization schedule.
        mode: ``train`` (weights only) or ``discover`` (with order parameters).
        seed: Root seed of every random draw.
        output_dir: Where result files go.
        grid_res: Sphere grid resolution for signal samples and peaks.
        peak_threshold: Relative height for ``peak_vectors``.
        checks: Properties run by ``check``.
        n_elements: Random group elements per equivariance/gradient check.
        checkpoint: Model to check instead of a fresh one.
    """

    model_config = ConfigDict(extra="forbid")

    schema_version: int = SCHEMA_VERSION
    scenario: Scenario
    model: ModelConfig = Field(default_factory=ModelConfig)
    training: TrainingConfig = Field(default_factory=TrainingConfig)
    mode: Mode = Mode.DISCOVER
    seed: int = Field(default=0, ge=0)
    output_dir: Path = Field(default_factory=lambda: get_runtime_settings().output_dir)
    grid_res: int = Field(default_factory=lambda: get_runtime_settings().grid_res, ge=8, le=512)
    peak_threshold: float = Field(default=0.9, gt=0, le=1)
    checks: list[CheckName] = Field(default_factory=lambda: list(CheckName))
    n_elements: int = Field(default=20, ge=1)
    checkpoint: Path | None = None

    @field_validator("schema_version")
    @classmethod
    def check_schema_version(cls, v: int) -> int:
        if v != SCHEMA_VERSION:
            raise ValueError(f"unsupported schema_version {v} (expected {SCHEMA_VERSION})")
        return v


def load_config(path: Path) -> ExperimentConfig:
    """Parse and validate a JSON experiment file.

    Raises:
        OSError: If the file cannot be read.
        json.JSONDecodeError: If it is not JSON.
        pydantic.ValidationError: If it does not match the schema.
    """
    data = json.loads(Path(path).read_text())
    return ExperimentConfig.model_validate(data)


def apply_overrides(
    config: ExperimentConfig,
    seed: int | None = None,
    output_dir: Path | None = None,
    grid_res: int | None = None,
) -> ExperimentConfig:
    """Command-line overrides, re-validated."""
    updates = {
        key: value
        for key, value in (("seed", seed), ("output_dir", output_dir), ("grid_res", grid_res))
        if value is not None
    }
    if not updates:
        return config
    return ExperimentConfig.model_validate({**config.model_dump(), **updates})


def derive_seeds(seed: int) -> dict[str, int]:
    """Named sub-seeds spawned from the root seed."""
    children = np.random.SeedSequence(seed).spawn(len(SUB_SEEDS))
    return {
        name: int(child.generate_state(1)[0])
        for name, child in zip(SUB_SEEDS, children, strict=True)
    }
