"""Operations with exact vector-Jacobian products.

Each op takes Nodes (or plain arrays, lifted to constants that receive no
adjoint) and returns a new Node whose ``vjp`` maps the output adjoint to one
adjoint per input. Shapes must match exactly except in ``multiply``, which
allows the size-1 axes used by gates.
"""

from collections.abc import Sequence
from functools import lru_cache

import numpy as np

from src.autodiff.graph import Node, ShapeMismatchError

ArrayLike = Node | np.ndarray | float


def lift(x: ArrayLike) -> Node:
    """Wrap a constant as a leafless node; Nodes pass through."""
    if isinstance(x, Node):
        return x
    return Node("const", np.asarray(x, dtype=np.float64))


def _is_const(node: Node) -> bool:
    return node.op == "const"


def _require_same_shape(op: str, nodes: Sequence[Node]) -> None:
    shapes = {node.shape for node in nodes}
    if len(shapes) > 1:
        raise ShapeMismatchError(f"{op}: incompatible shapes {sorted(shapes)}")


def _unbroadcast(gradient: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum ``gradient`` over the axes that were broadcast from ``shape``."""
    while gradient.ndim > len(shape):
        gradient = gradient.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and gradient.shape[axis] != 1:
            gradient = gradient.sum(axis=axis, keepdims=True)
    return gradient


def add(*terms: ArrayLike) -> Node:
    """Elementwise sum of any number of equally shaped terms."""
    nodes = [lift(t) for t in terms]
    if not nodes:
        raise ShapeMismatchError("add: no terms")
    _require_same_shape("add", nodes)
    value = nodes[0].value.copy()
    for node in nodes[1:]:
        value = value + node.value
    return Node("add", value, nodes, lambda g: [g for _ in nodes])


def subtract(a: ArrayLike, b: ArrayLike) -> Node:
    a, b = lift(a), lift(b)
    _require_same_shape("subtract", [a, b])
    return Node("subtract", a.value - b.value, [a, b], lambda g: [g, -g])


def scale(x: ArrayLike, alpha: float) -> Node:
    x = lift(x)
    return Node("scale", alpha * x.value, [x], lambda g: [alpha * g])


def multiply(a: ArrayLike, b: ArrayLike) -> Node:
    """Elementwise product; either side may have size-1 axes."""
    a, b = lift(a), lift(b)
    try:
        value = a.value * b.value
    except ValueError as e:
        raise ShapeMismatchError(f"multiply: shapes {a.shape} and {b.shape}") from e

    def vjp(g: np.ndarray) -> list[np.ndarray | None]:
        return [
            None if _is_const(a) else _unbroadcast(g * b.value, a.shape),
            None if _is_const(b) else _unbroadcast(g * a.value, b.shape),
        ]

    return Node("multiply", value, [a, b], vjp)


@lru_cache(maxsize=512)
def _contraction_path(subscripts: str, shapes: tuple[tuple[int, ...], ...]) -> list:
    operands = [np.empty(shape) for shape in shapes]
    return np.einsum_path(subscripts, *operands, optimize="greedy")[0]


def _einsum(subscripts: str, *operands: np.ndarray) -> np.ndarray:
    if len(operands) <= 2:
        return np.einsum(subscripts, *operands)
    path = _contraction_path(subscripts, tuple(op.shape for op in operands))
    return np.einsum(subscripts, *operands, optimize=path)


def contract(subscripts: str, *operands: ArrayLike) -> Node:
    """Multilinear contraction in ``einsum`` notation.

    Constant operands (3j tables, mixing matrices held fixed) take no adjoint.
    The adjoint of a differentiable operand is the contraction of the output
    adjoint with all other operands.
    """
    nodes = [lift(op) for op in operands]
    inputs_spec, _, output_spec = subscripts.replace(" ", "").partition("->")
    specs = inputs_spec.split(",")
    if len(specs) != len(nodes):
        raise ShapeMismatchError(f"contract: {len(nodes)} operands for '{subscripts}'")
    for spec, node in zip(specs, nodes, strict=True):
        if len(spec) != node.value.ndim:
            raise ShapeMismatchError(f"contract: operand {node.shape} does not fit '{spec}'")
        if len(set(spec)) != len(spec):
            raise ShapeMismatchError(f"contract: repeated index in '{spec}'")
    try:
        value = _einsum(subscripts, *(node.value for node in nodes))
    except ValueError as e:
        raise ShapeMismatchError(f"contract '{subscripts}': {e}") from e

    def vjp(g: np.ndarray) -> list[np.ndarray | None]:
        adjoints: list[np.ndarray | None] = []
        for k, node in enumerate(nodes):
            if _is_const(node):
                adjoints.append(None)
                continue
            others = [n.value for j, n in enumerate(nodes) if j != k]
            other_specs = [s for j, s in enumerate(specs) if j != k]
            rule = ",".join([output_spec, *other_specs]) + "->" + specs[k]
            adjoints.append(_einsum(rule, g, *others))
        return adjoints

    return Node("contract", value, nodes, vjp)


def gather(x: ArrayLike, index: np.ndarray) -> Node:
    """Rows ``x[index]`` along the first axis (neighbor features per edge)."""
    x = lift(x)
    index = np.asarray(index, dtype=np.intp)
    rows = x.shape[0]

    def vjp(g: np.ndarray) -> list[np.ndarray]:
        adjoint = np.zeros((rows, *g.shape[1:]))
        np.add.at(adjoint, index, g)
        return [adjoint]

    return Node("gather", x.value[index], [x], vjp)


def scatter_sum(x: ArrayLike, index: np.ndarray, size: int) -> Node:
    """Sum rows of ``x`` into ``size`` buckets (edge messages per center)."""
    x = lift(x)
    index = np.asarray(index, dtype=np.intp)
    if index.shape[0] != x.shape[0]:
        raise ShapeMismatchError(f"scatter_sum: {index.shape[0]} indices for {x.shape[0]} rows")
    value = np.zeros((size, *x.shape[1:]))
    np.add.at(value, index, x.value)
    return Node("scatter_sum", value, [x], lambda g: [g[index]])


def concat(parts: Sequence[ArrayLike], axis: int = -1) -> Node:
    nodes = [lift(p) for p in parts]
    try:
        value = np.concatenate([node.value for node in nodes], axis=axis)
    except ValueError as e:
        raise ShapeMismatchError(f"concat: {[node.shape for node in nodes]}") from e
    bounds = np.cumsum([node.shape[axis] for node in nodes])[:-1]
    return Node("concat", value, nodes, lambda g: np.split(g, bounds, axis=axis))


def reshape(x: ArrayLike, shape: tuple[int, ...]) -> Node:
    x = lift(x)
    try:
        value = x.value.reshape(shape)
    except ValueError as e:
        raise ShapeMismatchError(f"reshape: {x.shape} to {shape}") from e
    return Node("reshape", value, [x], lambda g: [g.reshape(x.shape)])


def take(x: ArrayLike, key: slice | int | tuple) -> Node:
    """Basic-indexing view ``x[key]``; the adjoint scatters back into zeros."""
    x = lift(x)

    def vjp(g: np.ndarray) -> list[np.ndarray]:
        adjoint = np.zeros_like(x.value)
        adjoint[key] = g
        return [adjoint]

    return Node("take", np.array(x.value[key]), [x], vjp)


def block_norm(x: ArrayLike) -> Node:
    """Euclidean norm over the last (m) axis; subgradient 0 at the origin."""
    x = lift(x)
    norm = np.sqrt(np.sum(x.value**2, axis=-1))

    def vjp(g: np.ndarray) -> list[np.ndarray]:
        safe = np.where(norm > 0, norm, 1.0)
        direction = np.where(norm[..., None] > 0, x.value / safe[..., None], 0.0)
        return [g[..., None] * direction]

    return Node("block_norm", norm, [x], vjp)


def sigmoid(x: ArrayLike) -> Node:
    x = lift(x)
    s = 0.5 * (1.0 + np.tanh(0.5 * x.value))
    return Node("sigmoid", s, [x], lambda g: [g * s * (1.0 - s)])


def tanh(x: ArrayLike) -> Node:
    x = lift(x)
    t = np.tanh(x.value)
    return Node("tanh", t, [x], lambda g: [g * (1.0 - t**2)])


def absolute(x: ArrayLike) -> Node:
    """``|x|`` with subgradient ``sign(x)``, which is 0 at 0."""
    x = lift(x)
    return Node("abs", np.abs(x.value), [x], lambda g: [g * np.sign(x.value)])


def square(x: ArrayLike) -> Node:
    x = lift(x)
    return Node("square", x.value**2, [x], lambda g: [2.0 * g * x.value])


def total(x: ArrayLike) -> Node:
    """Sum of all entries, as a scalar node."""
    x = lift(x)
    return Node("sum", np.asarray(x.value.sum()), [x], lambda g: [np.full(x.shape, float(g))])


def mean(x: ArrayLike) -> Node:
    x = lift(x)
    n = x.value.size
    return Node(
        "mean", np.asarray(x.value.mean()), [x], lambda g: [np.full(x.shape, float(g) / n)]
    )


def mse(prediction: ArrayLike, target: ArrayLike) -> Node:
    """Mean of squared differences over every entry."""
    return mean(square(subtract(prediction, target)))
