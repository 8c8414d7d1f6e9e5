"""Loss terms as autodiff nodes.

``mse_loss`` compares per-site signals. The penalties act on order-parameter
coefficients laid out by a signature; scalar (L=0) components are never
penalized.
"""

import numpy as np

from src.autodiff import Node, ops
from src.irreps import GeometricTensor, IrrepsSignature


class TrainingError(Exception):
    """Base error for training and discovery."""


def _unpack(
    order_params: GeometricTensor | Node | np.ndarray, signature: IrrepsSignature | None
) -> tuple[Node, IrrepsSignature]:
    if isinstance(order_params, GeometricTensor):
        return ops.lift(order_params.coefficients), order_params.signature
    if signature is None:
        raise TrainingError("A signature is required for raw order-parameter arrays")
    node = ops.lift(order_params)
    if node.shape[-1] != signature.dim:
        raise TrainingError(f"Order parameters of width {node.shape[-1]} do not fit {signature}")
    return node, signature


def _check_weight(lam: float) -> None:
    if lam < 0:
        raise TrainingError(f"Loss weight must be non-negative, got {lam}")


def mse_loss(prediction: Node | np.ndarray, target: Node | np.ndarray) -> Node:
    """Mean over sites and components of the squared difference."""
    return ops.mse(prediction, target)


def degree_weights(signature: IrrepsSignature) -> np.ndarray:
    """Degree L of every component, as floats."""
    return signature.degrees_per_component().astype(np.float64)


def sparsity_loss(
    order_params: GeometricTensor | Node | np.ndarray,
    lam: float,
    signature: IrrepsSignature | None = None,
) -> Node:
    """``lam * sum |x|`` over the L > 0 components."""
    _check_weight(lam)
    node, signature = _unpack(order_params, signature)
    mask = (degree_weights(signature) > 0).astype(np.float64)
    return ops.scale(ops.total(ops.multiply(ops.absolute(node), mask)), lam)


def degree_penalty(
    order_params: GeometricTensor | Node | np.ndarray,
    lam: float,
    signature: IrrepsSignature | None = None,
) -> Node:
    """``lam * sum L |x|``: grows linearly with the degree, L=0 is free."""
    _check_weight(lam)
    node, signature = _unpack(order_params, signature)
    return ops.scale(ops.total(ops.multiply(ops.absolute(node), degree_weights(signature))), lam)


def block_sparsity_loss(
    order_params: GeometricTensor | Node | np.ndarray,
    lam: float,
    signature: IrrepsSignature | None = None,
) -> Node:
    """``lam * sum ||block||`` over every L > 0 irrep copy (group lasso)."""
    _check_weight(lam)
    node, signature = _unpack(order_params, signature)
    rows = node if node.value.ndim == 2 else ops.reshape(node, (1, signature.dim))
    n_rows = rows.shape[0]
    terms = []
    for block_slice, entry in zip(signature.slices(), signature.entries, strict=True):
        if entry.irrep.is_scalar:
            continue
        block = ops.reshape(
            ops.take(rows, (slice(None), block_slice)), (n_rows, entry.mul, entry.irrep.dim)
        )
        terms.append(ops.total(ops.block_norm(block)))
    if not terms:
        return ops.lift(np.asarray(0.0))
    return ops.scale(terms[0] if len(terms) == 1 else ops.add(*terms), lam)


def soft_threshold(values: np.ndarray, thresholds: np.ndarray) -> np.ndarray:
    """Proximal map of a weighted L1 penalty."""
    return np.sign(values) * np.maximum(np.abs(values) - thresholds, 0.0)
