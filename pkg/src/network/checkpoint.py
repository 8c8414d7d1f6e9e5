"""Model checkpoints as JSON.

The header records the three signatures, the hyperparameters, the seeds and
the parameter layout; ``weights`` is the flat vector in layout order, as
JSON numbers (Python float repr, so values round-trip exactly).
"""

import json
import logging
from pathlib import Path

import numpy as np
from pydantic import ValidationError

from src.irreps import IrrepsSignature
from src.models.schemas import CHECKPOINT_FORMAT, CheckpointFile, ParameterEntry
from src.network.model import Model, ModelConfig

logger = logging.getLogger(__name__)


class CheckpointError(Exception):
    """Raised when a checkpoint cannot be read or does not fit its model."""


def checkpoint_payload(model: Model, seeds: dict[str, int] | None = None) -> CheckpointFile:
    return CheckpointFile(
        format=CHECKPOINT_FORMAT,
        input_signature=str(model.input_signature),
        hidden_signature=str(model.hidden_signature),
        output_signature=str(model.output_signature),
        model=model.config.model_dump(),
        seeds=seeds or {},
        layout=[
            ParameterEntry(name=b.name, shape=list(b.shape), offset=b.offset)
            for b in model.layout.blocks.values()
        ],
        weights=[float(w) for w in model.weights],
    )


def save_checkpoint(model: Model, path: Path, seeds: dict[str, int] | None = None) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(checkpoint_payload(model, seeds).model_dump_json(indent=1))
    logger.info("Saved checkpoint with %d parameters to %s", model.n_parameters, path)
    return path


def load_checkpoint(path: Path) -> tuple[Model, dict[str, int]]:
    """Rebuild the model stored at ``path``.

    Returns:
        The model with its weights, and the recorded seeds.

    Raises:
        CheckpointError: If the file is unreadable, malformed, or its layout
            does not match the model its header describes.
    """
    try:
        payload = CheckpointFile.model_validate_json(Path(path).read_text())
    except OSError as e:
        raise CheckpointError(f"Cannot read checkpoint {path}: {e}") from e
    except (ValidationError, json.JSONDecodeError) as e:
        raise CheckpointError(f"Malformed checkpoint {path}: {e}") from e

    try:
        model = Model(IrrepsSignature.parse(payload.input_signature), ModelConfig(**payload.model))
    except (ValidationError, ValueError) as e:
        raise CheckpointError(f"Checkpoint header does not describe a model: {e}") from e

    if str(model.output_signature) != payload.output_signature:
        raise CheckpointError(
            f"Output signature {payload.output_signature} does not match {model.output_signature}"
        )
    stored = [(p.name, tuple(p.shape), p.offset) for p in payload.layout]
    expected = [(b.name, b.shape, b.offset) for b in model.layout.blocks.values()]
    if stored != expected:
        raise CheckpointError("Checkpoint parameter layout does not match the model")
    weights = np.asarray(payload.weights, dtype=np.float64)
    if weights.shape[0] != model.n_parameters or not np.all(np.isfinite(weights)):
        raise CheckpointError(
            f"Checkpoint holds {weights.shape[0]} weights, model expects {model.n_parameters}"
        )
    model.set_weights(weights)
    return model, dict(payload.seeds)
