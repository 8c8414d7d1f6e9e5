"""Training loops, losses and order-parameter discovery.

Responsibilities:
    - Task: structure, input template with an order-parameter slot, targets
    - mse_loss / sparsity_loss / degree_penalty / block_sparsity_loss
    - Adam: full-batch optimizer on flat arrays
    - train: weight-only training with the slot held at zero
    - discover_order_parameters: plateau, then alternating weight and
      order-parameter updates with sparsity
    - magnitude_table: per-component report of recovered order parameters
"""

from src.training.losses import (
    TrainingError,
    block_sparsity_loss,
    degree_penalty,
    degree_weights,
    mse_loss,
    soft_threshold,
    sparsity_loss,
)
from src.training.optimizer import Adam, AdamConfig
from src.training.results import (
    MAGNITUDE_COLUMNS,
    DiscoveryResult,
    MagnitudeRow,
    Snapshot,
    TrainingHistory,
    block_magnitudes,
    component_share,
    component_totals,
    dominant_component,
    magnitude_frame,
    magnitude_table,
    write_magnitudes,
)
from src.training.task import Sharing, Task
from src.training.trainer import (
    DivergenceError,
    SparsityMode,
    Trainer,
    TrainingConfig,
    discover_order_parameters,
    plateaued,
    train,
)

__all__ = [
    "MAGNITUDE_COLUMNS",
    "Adam",
    "AdamConfig",
    "DiscoveryResult",
    "DivergenceError",
    "MagnitudeRow",
    "Sharing",
    "Snapshot",
    "SparsityMode",
    "Task",
    "Trainer",
    "TrainingConfig",
    "TrainingError",
    "TrainingHistory",
    "block_magnitudes",
    "block_sparsity_loss",
    "component_share",
    "component_totals",
    "degree_penalty",
    "degree_weights",
    "discover_order_parameters",
    "dominant_component",
    "magnitude_frame",
    "magnitude_table",
    "mse_loss",
    "plateaued",
    "soft_threshold",
    "sparsity_loss",
    "train",
    "write_magnitudes",
]
