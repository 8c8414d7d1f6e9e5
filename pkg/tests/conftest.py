"""Pytest fixtures and shared test configuration.

Provides reusable fixtures for unit and integration tests.

Fixtures:
    - test_data_dir: Path to small JSON fixtures
    - rng: Seeded random generator
    - small_model_config: Reduced network that keeps tests fast
    - square_task / rect_task: Square/rectangle tasks in both directions
    - square_model: Initialized model matching the square tasks
    - perovskite_task: Unconstrained a+b-b- tilt task
"""

from pathlib import Path

import numpy as np
import pytest

from src.network import Model, ModelConfig
from src.scenarios import TiltSpec, make_perovskite_task, make_square_rect_task
from src.training import Task


@pytest.fixture
def test_data_dir() -> Path:
    """Return path to test data directory.

    Returns:
        Absolute path to tests/data/ directory.
    """
    return Path(__file__).parent / "data"


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


@pytest.fixture
def small_model_config() -> ModelConfig:
    """Two thin layers, full output ladder."""
    return ModelConfig(
        output_lmax=5,
        hidden_lmax=2,
        hidden_mul=2,
        filter_lmax=2,
        n_layers=2,
        n_basis=6,
        radial_hidden=8,
        r_cut=2.5,
    )


@pytest.fixture(scope="session")
def square_task() -> Task:
    return make_square_rect_task("square_to_rect")


@pytest.fixture(scope="session")
def rect_task() -> Task:
    return make_square_rect_task("rect_to_square")


@pytest.fixture
def square_model(square_task: Task, small_model_config: ModelConfig) -> Model:
    model = Model(square_task.input_signature, small_model_config)
    model.initialize(np.random.default_rng(7))
    return model


@pytest.fixture(scope="session")
def perovskite_task() -> Task:
    return make_perovskite_task(TiltSpec(pattern="a+b-b-", theta_a=0.1, theta_b=0.1))
