"""Standard training and alternating order-parameter discovery.

Both loops run full-batch Adam on one fixed structure. ``train`` updates the
weights only, with the slot held at zero. ``discover_order_parameters``
first trains until the loss plateaus, then alternates blocks of weight
updates and order-parameter updates until the data term falls below the
target or the block budget runs out.
"""

import logging
from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from src.autodiff import Graph, Node, ops, value_and_grad
from src.network import Model
from src.symmetry import DEFAULT_TOLERANCE, LEARNED_TOLERANCE, CandidateGroup, stabilizer
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
from src.training.results import DiscoveryResult, Snapshot, TrainingHistory, magnitude_table
from src.training.task import Task

logger = logging.getLogger(__name__)


class SparsityMode(str, Enum):
    """How the nonsmooth penalties enter the order-parameter updates."""

    PROXIMAL = "proximal"
    SUBGRADIENT = "subgradient"
    BLOCK = "block"


class TrainingConfig(BaseModel):
    """Optimization schedule.

    Attributes:
        steps: Weight updates performed by ``train``.
        learning_rate: Adam step size for the weights.
        input_learning_rate: Adam step size for the order parameters.
        log_every: Steps between progress log lines.
        plateau_window: Steps over which an improvement must show up.
        plateau_tolerance: Minimum relative improvement over the window.
        max_plateau_steps: Cap on the weight-only phase of discovery.
        model_steps_per_block: Weight updates per alternation block.
        input_steps_per_block: Order-parameter updates per alternation block.
        max_blocks: Alternation budget.
        target_loss: Discovery stops once the data term is below this.
        sparsity_mode: Penalty handling in the order-parameter updates.
        divergence_threshold: Losses above this (or non-finite) abort the run.
    """

    model_config = ConfigDict(extra="forbid")

    steps: int = Field(default=5000, ge=0)
    learning_rate: float = Field(default=1e-2, gt=0)
    input_learning_rate: float = Field(default=1e-2, gt=0)
    log_every: int = Field(default=500, ge=1)
    plateau_window: int = Field(default=300, ge=1)
    plateau_tolerance: float = Field(default=1e-4, ge=0)
    max_plateau_steps: int = Field(default=5000, ge=0)
    model_steps_per_block: int = Field(default=200, ge=0)
    input_steps_per_block: int = Field(default=200, ge=0)
    max_blocks: int = Field(default=50, ge=0)
    target_loss: float = Field(default=1e-5, ge=0)
    sparsity_mode: SparsityMode = SparsityMode.PROXIMAL
    divergence_threshold: float = Field(default=1e10, gt=0)


class DivergenceError(TrainingError):
    """Raised when the loss leaves the finite range; carries the history so far."""

    def __init__(self, message: str, history: TrainingHistory) -> None:
        super().__init__(message)
        self.history = history


def plateaued(losses: list[float], window: int, tolerance: float) -> bool:
    """True when the best loss of the last ``window`` steps improves on the
    best loss before them by less than ``tolerance`` (relative)."""
    if len(losses) <= window:
        return False
    before = min(losses[:-window])
    recent = min(losses[-window:])
    return before - recent <= tolerance * abs(before)


class Trainer:
    """Owns one model/task pair, both optimizers and the loss history."""

    def __init__(self, model: Model, task: Task, config: TrainingConfig) -> None:
        if task.target_signature != model.output_signature:
            raise TrainingError(
                f"Task targets {task.target_signature} differ from model output "
                f"{model.output_signature}"
            )
        if task.input_signature != model.input_signature:
            raise TrainingError(
                f"Task inputs {task.input_signature} differ from model input "
                f"{model.input_signature}"
            )
        self.model = model
        self.task = task
        self.config = config
        self.geometry = model.geometry(task.structure)
        self.order_parameters = task.initial_order_parameters()
        self.weight_optimizer = Adam(
            model.weights.shape, AdamConfig(learning_rate=config.learning_rate)
        )
        self.input_optimizer = Adam(
            self.order_parameters.shape, AdamConfig(learning_rate=config.input_learning_rate)
        )
        self.history = TrainingHistory()
        self.graph = Graph(self._build, parameters=("weights",), inputs=("order_parameters",))
        self._with_penalties = False
        self._mse: Node | None = None

        slot = task.slot_signature
        self._penalty_weights = task.lambda_sparsity * (
            degree_weights(slot) > 0
        ) + task.lambda_degree * degree_weights(slot)

    def _penalties(self, order_parameters: Node | np.ndarray) -> list[Node]:
        task = self.task
        slot = task.slot_signature
        if not slot.dim:
            return []
        if self.config.sparsity_mode is SparsityMode.BLOCK:
            terms = [block_sparsity_loss(order_parameters, task.lambda_sparsity, slot)]
        else:
            terms = [sparsity_loss(order_parameters, task.lambda_sparsity, slot)]
        if task.lambda_degree:
            terms.append(degree_penalty(order_parameters, task.lambda_degree, slot))
        return terms

    def _build(self, leaves: dict[str, Node]) -> Node:
        features = self.task.expand(leaves["order_parameters"])
        prediction = self.model.apply(leaves["weights"], features, self.geometry)
        self._mse = mse_loss(prediction, self.task.targets)
        if not self._with_penalties:
            return self._mse
        return ops.add(self._mse, *self._penalties(leaves["order_parameters"]))

    def penalty_value(self) -> float:
        return float(sum(term.value for term in self._penalties(self.order_parameters)))

    def evaluate(self, with_penalties: bool = False) -> tuple[float, float, dict[str, np.ndarray]]:
        """(objective, data term, gradients) at the current weights and slots."""
        self._with_penalties = with_penalties
        loss, gradients = value_and_grad(
            self.graph,
            {"weights": self.model.weights, "order_parameters": self.order_parameters},
        )
        return loss, float(self._mse.value), gradients

    def _guard(self, loss: float, phase: str) -> None:
        if not np.isfinite(loss) or loss > self.config.divergence_threshold:
            step = self.history.n_steps
            message = f"Loss diverged to {loss} during the {phase} phase at step {step}"
            logger.error(message)
            raise DivergenceError(message, self.history.model_copy(deep=True))

    def _log(self, phase: str, loss: float, mse: float) -> None:
        step = self.history.n_steps
        if step % self.config.log_every == 0:
            logger.info("%s step %d: loss %.6e (mse %.6e)", phase, step, loss, mse)

    def model_step(self) -> float:
        """One weight update; returns the total loss before it."""
        _, mse, gradients = self.evaluate(with_penalties=False)
        loss = mse + self.penalty_value()
        self._guard(loss, "model")
        self._log("model", loss, mse)
        self.history.model_phase.append(loss)
        self.history.mse.append(mse)
        self.model.weights = self.weight_optimizer.step(self.model.weights, gradients["weights"])
        return loss

    def input_step(self) -> float:
        """One order-parameter update; returns the total loss before it."""
        proximal = self.config.sparsity_mode is SparsityMode.PROXIMAL
        objective, mse, gradients = self.evaluate(with_penalties=not proximal)
        loss = mse + self.penalty_value() if proximal else objective
        self._guard(loss, "input")
        self._log("input", loss, mse)
        self.history.input_phase.append(loss)
        self.history.mse.append(mse)
        updated = self.input_optimizer.step(self.order_parameters, gradients["order_parameters"])
        if proximal:
            thresholds = self._penalty_weights * self.input_optimizer.step_sizes()
            updated = soft_threshold(updated, thresholds)
        if self.task.component_mask is not None:
            updated = updated * self.task.component_mask
        self.order_parameters = updated
        return loss

    def train_until_plateau(self, max_steps: int) -> int | None:
        """Weight updates until the plateau rule fires; returns that step or None."""
        for _ in range(max_steps):
            self.model_step()
            if plateaued(
                self.history.model_phase, self.config.plateau_window, self.config.plateau_tolerance
            ):
                step = len(self.history.model_phase)
                loss = self.history.model_phase[-1]
                logger.info("Plateau after %d model steps (loss %.6e)", step, loss)
                return step
        return None

    def current_mse(self) -> float:
        return self.evaluate(with_penalties=False)[1]

    def prediction(self) -> np.ndarray:
        features = self.task.input_features(self.order_parameters)
        return self.model.forward(self.task.structure, features)

    def snapshot(self, label: str) -> Snapshot:
        return Snapshot(
            label=label,
            step=self.history.n_steps,
            order_parameters=self.order_parameters.tolist(),
            site0_output=self.prediction()[0].tolist(),
        )


def train(model: Model, task: Task, config: TrainingConfig) -> tuple[Model, TrainingHistory]:
    """Weight-only training for ``config.steps`` steps, slots fixed at zero.

    Raises:
        DivergenceError: If the loss becomes non-finite or exceeds the threshold.
    """
    trainer = Trainer(model, task, config)
    logger.info("Training %s for %d steps", task.name, config.steps)
    for _ in range(config.steps):
        trainer.model_step()
    if config.steps:
        trainer.history.mse.append(trainer.current_mse())
        logger.info("Finished %s: mse %.6e", task.name, trainer.history.mse[-1])
    return model, trainer.history


def discover_order_parameters(
    model: Model,
    task: Task,
    config: TrainingConfig,
    group: CandidateGroup | None = None,
    tol: float = LEARNED_TOLERANCE,
) -> DiscoveryResult:
    """Train to a plateau, then alternate weight and order-parameter updates.

    Args:
        model: Initialized model; updated in place.
        task: Task with a non-empty order-parameter slot (starting at zero).
        config: Schedule and penalty handling.
        group: When given, stabilizers of the input configuration before and
            after discovery are reported.
        tol: Stabilizer tolerance for the recovered configuration.

    Raises:
        TrainingError: If the task has no order-parameter slot.
        DivergenceError: If the loss leaves the finite range.
    """
    if not task.slot_signature.dim:
        raise TrainingError(f"Task {task.name} declares no order-parameter slot")
    trainer = Trainer(model, task, config)
    start = trainer.snapshot("start")

    logger.info("Discovery on %s: weight-only phase", task.name)
    trainer.history.plateau_step = trainer.train_until_plateau(config.max_plateau_steps)

    block_snapshots: list[Snapshot] = []
    for block in range(config.max_blocks):
        for _ in range(config.model_steps_per_block):
            trainer.model_step()
        for _ in range(config.input_steps_per_block):
            trainer.input_step()
        trainer.history.blocks = block + 1
        block_snapshots.append(trainer.snapshot(f"block {block + 1}"))
        mse = trainer.current_mse()
        logger.info("Block %d done: mse %.6e", block + 1, mse)
        if mse < config.target_loss:
            logger.info("Target loss reached after %d blocks", block + 1)
            break

    trainer.history.mse.append(trainer.current_mse())
    snapshots = [start]
    if block_snapshots:
        middle = block_snapshots[(len(block_snapshots) - 1) // 2]
        snapshots.append(middle.model_copy(update={"label": "middle"}))
        snapshots.append(block_snapshots[-1].model_copy(update={"label": "end"}))

    recovered = task.site_tensors(trainer.order_parameters)
    sites = list(task.slot_sites)
    before = after = None
    if group is not None:
        signature = task.input_signature
        before = stabilizer(
            task.structure, task.input_features(), signature, group, DEFAULT_TOLERANCE
        )
        after = stabilizer(
            task.structure, task.input_features(trainer.order_parameters), signature, group, tol
        )
        logger.info(
            "Stabilizer of the input: %d elements before, %d after", before.size, after.size
        )

    return DiscoveryResult(
        order_parameters=trainer.order_parameters,
        recovered=recovered,
        recovered_sites=sites,
        history=trainer.history,
        magnitudes=magnitude_table(recovered, sites),
        stabilizer_before=before,
        stabilizer_after=after,
        snapshots=snapshots,
    )
