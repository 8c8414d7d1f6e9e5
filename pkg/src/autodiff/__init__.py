"""Reverse-mode differentiation over irrep-block operations.

Responsibilities:
    - Graph / Node: a tape rebuilt on every forward pass from a builder
    - forward / backward: scalar evaluation and adjoints for every leaf
    - ops: add, scale, multiply, einsum contraction, gather/scatter-sum,
      block norm, sigmoid, tanh, abs, square, mean
    - grad_check: central-difference validation of the adjoints

Everything runs in float64.
"""

from src.autodiff import ops
from src.autodiff.graph import (
    AutodiffError,
    BackwardBeforeForwardError,
    Graph,
    Node,
    ShapeMismatchError,
    backward,
    forward,
    grad_check,
    topological_order,
    value_and_grad,
)

__all__ = [
    "AutodiffError",
    "BackwardBeforeForwardError",
    "Graph",
    "Node",
    "ShapeMismatchError",
    "backward",
    "forward",
    "grad_check",
    "ops",
    "topological_order",
    "value_and_grad",
]
