"""Reverse-mode differentiation graph.

A Graph wraps a builder function that, given named leaf nodes, composes
operations from :mod:`src.autodiff.ops` into a scalar root. ``forward``
binds leaf values, runs the builder and records the nodes in topological
order; ``backward`` walks that order in reverse exactly once, accumulating
adjoints. Leaves the root does not depend on get an exact zero gradient.
"""

import logging
from collections.abc import Callable, Mapping, Sequence

import numpy as np

logger = logging.getLogger(__name__)


class AutodiffError(Exception):
    """Base error for graph evaluation."""


class ShapeMismatchError(AutodiffError):
    """Raised when connected nodes disagree on shapes."""


class BackwardBeforeForwardError(AutodiffError):
    """Raised when gradients are requested before a forward pass."""


VJP = Callable[[np.ndarray], Sequence[np.ndarray | None]]


class Node:
    """One operation on the tape: kind, inputs, forward value, adjoint."""

    __slots__ = ("op", "inputs", "value", "adjoint", "vjp", "name")

    def __init__(
        self,
        op: str,
        value: np.ndarray,
        inputs: Sequence["Node"] = (),
        vjp: VJP | None = None,
        name: str | None = None,
    ) -> None:
        self.op = op
        self.value = value
        self.inputs = tuple(inputs)
        self.vjp = vjp
        self.adjoint: np.ndarray | None = None
        self.name = name

    @property
    def shape(self) -> tuple[int, ...]:
        return self.value.shape

    def __repr__(self) -> str:
        return f"Node({self.op}, shape={self.shape})"


def leaf(name: str, value: np.ndarray) -> Node:
    return Node("leaf", np.array(value, dtype=np.float64), name=name)


def topological_order(root: Node) -> list[Node]:
    """Post-order of every node reachable from ``root`` (inputs first)."""
    order: list[Node] = []
    visited: set[int] = set()
    stack: list[tuple[Node, bool]] = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack.append((node, True))
        for parent in reversed(node.inputs):
            if id(parent) not in visited:
                stack.append((parent, False))
    return order


class Graph:
    """Differentiable program with designated parameter and input leaves.

    Attributes:
        builder: Maps ``{leaf name: Node}`` to the scalar root node.
        parameters: Names of parameter leaves.
        inputs: Names of input leaves.
    """

    def __init__(
        self,
        builder: Callable[[dict[str, Node]], Node],
        parameters: Sequence[str],
        inputs: Sequence[str] = (),
    ) -> None:
        self.builder = builder
        self.parameters = tuple(parameters)
        self.inputs = tuple(inputs)
        self.nodes: list[Node] = []
        self.leaves: dict[str, Node] = {}
        self.root: Node | None = None
        self._backward_ready = False

    @property
    def leaf_names(self) -> tuple[str, ...]:
        return self.parameters + self.inputs

    @property
    def leaf_values(self) -> dict[str, np.ndarray]:
        return {name: node.value for name, node in self.leaves.items()}


def forward(graph: Graph, leaf_values: Mapping[str, np.ndarray]) -> float:
    """Bind leaves, evaluate the builder and return the scalar root value.

    Raises:
        AutodiffError: If a designated leaf has no value.
        ShapeMismatchError: If the root is not a scalar.
    """
    missing = [name for name in graph.leaf_names if name not in leaf_values]
    if missing:
        raise AutodiffError(f"Unbound leaves: {', '.join(missing)}")

    graph.leaves = {name: leaf(name, leaf_values[name]) for name in graph.leaf_names}
    root = graph.builder(graph.leaves)
    if root.value.size != 1:
        raise ShapeMismatchError(f"Root must be scalar, got shape {root.shape}")
    graph.root = root
    graph.nodes = topological_order(root)
    graph._backward_ready = True
    return float(root.value.reshape(()))


def backward(graph: Graph) -> dict[str, np.ndarray]:
    """Gradient of the root with respect to every designated leaf.

    Raises:
        BackwardBeforeForwardError: If ``forward`` has not run.
    """
    if not graph._backward_ready or graph.root is None:
        raise BackwardBeforeForwardError("backward called before forward")

    for node in graph.nodes:
        node.adjoint = None
    graph.root.adjoint = np.ones_like(graph.root.value)

    for node in reversed(graph.nodes):
        if node.adjoint is None or node.vjp is None:
            continue
        contributions = node.vjp(node.adjoint)
        for parent, contribution in zip(node.inputs, contributions, strict=True):
            if contribution is None:
                continue
            if contribution.shape != parent.shape:
                raise ShapeMismatchError(
                    f"Adjoint of shape {contribution.shape} for {parent!r} from {node!r}"
                )
            parent.adjoint = (
                contribution if parent.adjoint is None else parent.adjoint + contribution
            )

    gradients = {}
    for name, node in graph.leaves.items():
        gradients[name] = (
            np.zeros_like(node.value) if node.adjoint is None else np.array(node.adjoint)
        )
    return gradients


def value_and_grad(
    graph: Graph, leaf_values: Mapping[str, np.ndarray]
) -> tuple[float, dict[str, np.ndarray]]:
    value = forward(graph, leaf_values)
    return value, backward(graph)


def grad_check(
    graph: Graph,
    leaf_name: str,
    n_coords: int,
    step: float,
    rng: np.random.Generator,
    leaf_values: Mapping[str, np.ndarray] | None = None,
    min_magnitude: float = 0.0,
) -> float:
    """Worst relative error of the adjoint against central differences.

    Coordinates are drawn at random among those whose analytic gradient is
    at least ``min_magnitude`` times the largest one (0 keeps all). The
    relative error uses ``max(|a|, |b|, 1e-12)`` as denominator.
    """
    if step <= 0:
        raise AutodiffError(f"step must be positive, got {step}")
    source = leaf_values or graph.leaf_values
    values = {k: np.array(v, dtype=np.float64) for k, v in source.items()}
    _, gradients = value_and_grad(graph, values)
    analytic = gradients[leaf_name].reshape(-1)

    eligible = np.flatnonzero(np.abs(analytic) >= min_magnitude * np.abs(analytic).max())
    if eligible.size == 0:
        eligible = np.arange(analytic.size)
    coords = rng.choice(eligible, size=min(n_coords, eligible.size), replace=False)

    worst = 0.0
    base = values[leaf_name]
    for coord in coords:
        shifted = dict(values)
        plus = base.copy().reshape(-1)
        plus[coord] += step
        shifted[leaf_name] = plus.reshape(base.shape)
        f_plus = forward(graph, shifted)
        minus = base.copy().reshape(-1)
        minus[coord] -= step
        shifted[leaf_name] = minus.reshape(base.shape)
        f_minus = forward(graph, shifted)

        numeric = (f_plus - f_minus) / (2 * step)
        exact = float(analytic[coord])
        error = abs(exact - numeric) / max(abs(exact), abs(numeric), 1e-12)
        worst = max(worst, error)

    forward(graph, values)
    logger.debug(
        "grad_check on %s: %d coords, worst relative error %.3e", leaf_name, len(coords), worst
    )
    return worst
