"""Equivariant network assembly and evaluation.

Responsibilities:
    - neighbor_list / radial_basis / EdgeGeometry: edges within a cutoff
      (minimum image for periodic cells) and the per-edge constants
    - Layer / RadialNet / Gate / Readout: tensor-product convolutions over
      enumerated coupling paths, gated nonlinearity, linear readout
    - Model / layer_forward / model_forward: forward passes to per-site
      sphere signals
    - save_checkpoint / load_checkpoint: JSON checkpoints of the flat weights
"""

from src.network.checkpoint import (
    CheckpointError,
    checkpoint_payload,
    load_checkpoint,
    save_checkpoint,
)
from src.network.geometry import (
    EdgeGeometry,
    MinimumImageError,
    NeighborList,
    NetworkError,
    RadialRangeError,
    cosine_cutoff,
    neighbor_list,
    radial_basis,
)
from src.network.layers import (
    Gate,
    Layer,
    ParameterLayout,
    PathGroup,
    RadialNet,
    Readout,
    enumerate_paths,
    merge_blocks,
    path_allowed,
    split_blocks,
)
from src.network.model import Model, ModelConfig, layer_forward, model_forward

__all__ = [
    "CheckpointError",
    "EdgeGeometry",
    "Gate",
    "Layer",
    "MinimumImageError",
    "Model",
    "ModelConfig",
    "NeighborList",
    "NetworkError",
    "ParameterLayout",
    "PathGroup",
    "RadialNet",
    "RadialRangeError",
    "Readout",
    "checkpoint_payload",
    "cosine_cutoff",
    "enumerate_paths",
    "layer_forward",
    "load_checkpoint",
    "merge_blocks",
    "model_forward",
    "neighbor_list",
    "path_allowed",
    "radial_basis",
    "save_checkpoint",
    "split_blocks",
]
