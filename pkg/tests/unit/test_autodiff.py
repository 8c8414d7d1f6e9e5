"""Unit tests for the reverse-mode tape and its operations."""

import numpy as np
import pytest
import pytest_check as check
from hypothesis import given, settings
from hypothesis import strategies as st

from src.autodiff import (
    AutodiffError,
    BackwardBeforeForwardError,
    Graph,
    ShapeMismatchError,
    backward,
    forward,
    grad_check,
    ops,
    value_and_grad,
)


def _graph(builder, *names: str) -> Graph:
    return Graph(builder, parameters=names)


class TestForwardBackward:
    """Tests for evaluation order and adjoint accumulation."""

    def test_polynomial_gradient(self) -> None:
        """d/dx sum(x^2 + 3x) = 2x + 3."""
        graph = _graph(
            lambda v: ops.total(ops.add(ops.square(v["x"]), ops.scale(v["x"], 3.0))), "x"
        )
        x = np.array([1.0, -2.0, 0.5])
        value, grads = value_and_grad(graph, {"x": x})

        check.almost_equal(value, float(np.sum(x**2 + 3 * x)))
        check.is_true(np.allclose(grads["x"], 2 * x + 3))

    def test_shared_node_accumulates(self) -> None:
        """A node used twice receives both adjoints."""
        graph = _graph(lambda v: ops.total(ops.multiply(v["x"], v["x"])), "x")
        _, grads = value_and_grad(graph, {"x": np.array([3.0])})

        assert grads["x"][0] == pytest.approx(6.0)

    def test_unused_leaf_gets_zeros(self) -> None:
        graph = Graph(lambda v: ops.total(v["a"]), parameters=("a",), inputs=("b",))
        _, grads = value_and_grad(graph, {"a": np.ones(2), "b": np.ones((2, 3))})

        check.equal(grads["b"].shape, (2, 3))
        check.is_false(np.any(grads["b"]))

    def test_backward_before_forward(self) -> None:
        """Backward before forward raises BackwardBeforeForwardError."""
        graph = _graph(lambda v: ops.total(v["x"]), "x")

        with pytest.raises(BackwardBeforeForwardError, match="before forward"):
            backward(graph)

    def test_unbound_leaf(self) -> None:
        graph = Graph(lambda v: ops.total(v["w"]), parameters=("w",), inputs=("x",))

        with pytest.raises(AutodiffError, match="Unbound leaves: x"):
            forward(graph, {"w": np.ones(1)})

    def test_root_must_be_scalar(self) -> None:
        graph = _graph(lambda v: ops.square(v["x"]), "x")

        with pytest.raises(ShapeMismatchError, match="scalar"):
            forward(graph, {"x": np.ones(3)})

    def test_forward_is_repeatable(self) -> None:
        """The tape is rebuilt on every forward pass."""
        graph = _graph(lambda v: ops.total(ops.square(v["x"])), "x")

        check.equal(forward(graph, {"x": np.array([2.0])}), 4.0)
        check.equal(forward(graph, {"x": np.array([3.0])}), 9.0)


class TestOps:
    """Tests for individual operation adjoints and shape rules."""

    def test_add_rejects_mismatched_shapes(self) -> None:
        with pytest.raises(ShapeMismatchError, match="incompatible shapes"):
            ops.add(np.ones(2), np.ones(3))

    def test_contract_rejects_repeated_index(self) -> None:
        with pytest.raises(ShapeMismatchError, match="repeated index"):
            ops.contract("ii->i", np.eye(2))

    def test_contract_operand_rank(self) -> None:
        with pytest.raises(ShapeMismatchError, match="does not fit"):
            ops.contract("ij,j->i", np.ones(3), np.ones(3))

    def test_gather_scatter_adjoints(self) -> None:
        """Gather sums adjoints of repeated rows; scatter-sum routes them back."""
        index = np.array([0, 0, 1])
        graph = _graph(
            lambda v: ops.total(ops.square(ops.scatter_sum(ops.gather(v["x"], index), index, 2))),
            "x",
        )
        x = np.array([[1.0, 2.0], [3.0, 4.0]])
        _, grads = value_and_grad(graph, {"x": x})
        # y0 = 2 x0, y1 = x1, loss = |y0|^2 + |y1|^2
        np.testing.assert_allclose(grads["x"], [[8.0, 16.0], [6.0, 8.0]])

    def test_block_norm_zero_subgradient(self) -> None:
        graph = _graph(lambda v: ops.total(ops.block_norm(v["x"])), "x")
        _, grads = value_and_grad(graph, {"x": np.zeros((2, 3))})

        assert not np.any(grads["x"])

    def test_absolute_subgradient(self) -> None:
        graph = _graph(lambda v: ops.total(ops.absolute(v["x"])), "x")
        _, grads = value_and_grad(graph, {"x": np.array([-2.0, 0.0, 5.0])})

        np.testing.assert_array_equal(grads["x"], [-1.0, 0.0, 1.0])

    def test_multiply_broadcast_adjoint(self) -> None:
        """Broadcast factors get adjoints summed back to their shape."""
        graph = _graph(lambda v: ops.total(ops.multiply(v["x"], v["s"])), "x", "s")
        x = np.arange(6.0).reshape(2, 3)
        _, grads = value_and_grad(graph, {"x": x, "s": np.ones((1, 3))})

        check.equal(grads["s"].shape, (1, 3))
        check.is_true(np.allclose(grads["s"], x.sum(axis=0, keepdims=True)))

    def test_mse_value(self) -> None:
        assert ops.mse(np.array([1.0, 3.0]), np.array([0.0, 0.0])).value == pytest.approx(5.0)


class TestGradCheck:
    """Tests for the finite-difference validation helper."""

    def test_step_must_be_positive(self, rng: np.random.Generator) -> None:
        graph = _graph(lambda v: ops.total(v["x"]), "x")
        forward(graph, {"x": np.ones(2)})

        with pytest.raises(AutodiffError, match="step"):
            grad_check(graph, "x", 1, 0.0, rng)

    @settings(max_examples=15, deadline=None)
    @given(seed=st.integers(0, 2**31))
    def test_composite_program(self, seed: int) -> None:
        """Contractions with gates and norms agree with central differences."""
        rng = np.random.default_rng(seed)
        coupling = rng.normal(size=(3, 3, 5))

        def builder(v):
            mixed = ops.contract("nu,uv->nv", v["x"], v["w"])
            pairs = ops.contract("ni,nj,ijk->nk", mixed, mixed, coupling)
            gate = ops.sigmoid(ops.take(pairs, (slice(None), slice(0, 1))))
            gated = ops.multiply(ops.tanh(pairs), gate)
            return ops.add(ops.mean(ops.square(gated)), ops.total(ops.block_norm(mixed)))

        graph = _graph(builder, "w", "x")
        values = {"w": rng.normal(size=(3, 3)), "x": rng.normal(size=(4, 3))}
        forward(graph, values)

        assert grad_check(graph, "w", 9, 1e-6, rng, min_magnitude=1e-3) < 1e-5
