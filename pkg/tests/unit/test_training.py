"""Unit tests for losses, the optimizer, tasks and the training loops."""

import numpy as np
import pytest
import pytest_check as check
from pydantic import ValidationError

from src.autodiff import ops
from src.irreps import GeometricTensor, IrrepsSignature
from src.network import Model, ModelConfig
from src.scenarios import make_square_rect_task
from src.symmetry import cubic_group
from src.training import (
    Adam,
    AdamConfig,
    DiscoveryResult,
    DivergenceError,
    Sharing,
    Task,
    Trainer,
    TrainingConfig,
    TrainingError,
    TrainingHistory,
    block_sparsity_loss,
    component_share,
    degree_penalty,
    discover_order_parameters,
    dominant_component,
    magnitude_table,
    plateaued,
    soft_threshold,
    sparsity_loss,
    train,
)


@pytest.fixture
def quick_config() -> TrainingConfig:
    """A schedule of a few dozen steps.

    Returns:
        TrainingConfig with tiny phase lengths.
    """
    return TrainingConfig(
        steps=20,
        log_every=10,
        plateau_window=5,
        max_plateau_steps=15,
        model_steps_per_block=3,
        input_steps_per_block=3,
        max_blocks=3,
        target_loss=0.0,
    )


class TestLosses:
    """Tests for the data term and the penalties."""

    def test_sparsity_skips_scalars(self) -> None:
        tensor = GeometricTensor(
            signature=IrrepsSignature.parse("1x0e + 1x1o"), coefficients=[2.0, 1.0, -1.0, 1.0]
        )

        assert sparsity_loss(tensor, 0.5).value == pytest.approx(1.5)

    def test_degree_penalty_grows_with_degree(self) -> None:
        signature = IrrepsSignature.parse("1x1e + 1x2e")
        low = degree_penalty(np.r_[np.ones(3), np.zeros(5)], 0.1, signature).value
        high = degree_penalty(np.r_[np.zeros(3), np.ones(3), np.zeros(2)], 0.1, signature).value

        check.almost_equal(float(low), 0.3)
        check.almost_equal(float(high), 0.6)

    def test_block_sparsity_is_group_norm(self) -> None:
        signature = IrrepsSignature.parse("1x0e + 1x1o")

        loss = block_sparsity_loss(np.array([[9.0, 3.0, 4.0, 0.0]]), 2.0, signature)

        assert loss.value == pytest.approx(10.0)

    def test_negative_weight_rejected(self) -> None:
        """A negative lambda raises TrainingError."""
        with pytest.raises(TrainingError, match="non-negative"):
            sparsity_loss(np.zeros(3), -1.0, IrrepsSignature.parse("1x1o"))

    def test_raw_array_needs_signature(self) -> None:
        with pytest.raises(TrainingError, match="signature is required"):
            degree_penalty(np.zeros(3), 0.1)

    def test_soft_threshold(self) -> None:
        values = np.array([0.5, -0.05, -2.0, 0.0])
        thresholds = np.array([0.1, 0.1, 0.5, 0.1])

        np.testing.assert_allclose(soft_threshold(values, thresholds), [0.4, 0.0, -1.5, 0.0])

    def test_sparsity_of_single_component(self) -> None:
        """0.5 on one quadrupole component with lambda 0.01 costs 0.005."""
        tensor = GeometricTensor(
            signature=IrrepsSignature.parse("1x2e"), coefficients=[0.0, 0.0, 0.5, 0.0, 0.0]
        )

        assert sparsity_loss(tensor, 0.01).value == pytest.approx(0.005)


class TestAdam:
    """Tests for the optimizer."""

    def test_first_step_moves_by_learning_rate(self) -> None:
        """Bias correction makes the first step lr * sign(g)."""
        optimizer = Adam((3,), AdamConfig(learning_rate=0.1))
        params = np.zeros(3)
        updated = optimizer.step(params, np.array([2.0, -0.5, 1e3]))

        check.is_true(np.allclose(updated, [-0.1, 0.1, -0.1], atol=1e-6))
        check.is_true(np.all(params == 0.0))

    def test_learning_rate_validated(self) -> None:
        with pytest.raises(ValidationError):
            AdamConfig(learning_rate=0.0)

    def test_step_sizes_after_first_step(self) -> None:
        """After one step the multiplier is lr / (|g| + eps) per coordinate."""
        optimizer = Adam((3,), AdamConfig(learning_rate=0.1))
        gradient = np.array([2.0, -0.5, 0.0])
        optimizer.step(np.zeros(3), gradient)

        np.testing.assert_allclose(optimizer.step_sizes(), 0.1 / (np.abs(gradient) + 1e-8))

    def test_step_sizes_need_a_step(self) -> None:
        with pytest.raises(ValueError, match="after the first step"):
            Adam((2,)).step_sizes()


class TestTask:
    """Tests for task validation and feature assembly."""

    def test_global_slot_is_replicated(self, square_task: Task, rng: np.random.Generator) -> None:
        values = rng.normal(size=square_task.order_parameter_shape)
        features = square_task.input_features(values)

        check.equal(square_task.order_parameter_shape, (1, 70))
        check.is_true(np.allclose(features[:, 0], 1.0))
        check.is_true(np.allclose(features[:, 1:], values))

    def test_zero_slots_by_default(self, square_task: Task) -> None:
        assert not np.any(square_task.input_features()[:, 1:])

    def test_targets_shape_checked(self, square_task: Task) -> None:
        """Targets for the wrong number of sites fail validation."""
        with pytest.raises(ValidationError, match="targets of shape"):
            Task(
                name="broken",
                structure=square_task.structure,
                species_kinds=("x",),
                targets=square_task.targets[:3],
                target_signature=square_task.target_signature,
            )

    def test_custom_sharing_needs_groups(self, square_task: Task) -> None:
        with pytest.raises(ValidationError, match="tie group"):
            Task.model_validate({**square_task.__dict__, "sharing": Sharing.CUSTOM})

    def test_component_mask_zeroes_slot(self, square_task: Task) -> None:
        mask = np.ones(square_task.slot_signature.dim)
        mask[:3] = 0.0
        task = Task.model_validate({**square_task.__dict__, "component_mask": mask})
        features = task.input_features(np.ones(task.order_parameter_shape))

        check.is_false(np.any(features[:, 1:4]))
        check.is_true(np.all(features[:, 4:] == 1.0))

    def test_species_channel_required(self, square_task: Task) -> None:
        with pytest.raises(ValidationError, match="no input channel"):
            Task.model_validate({**square_task.__dict__, "species_kinds": ("y",)})


class TestPlateau:
    """Tests for the plateau rule."""

    def test_too_short(self) -> None:
        assert not plateaued([1.0, 0.9], window=5, tolerance=1e-3)

    def test_flat_tail(self) -> None:
        assert plateaued([1.0, 0.5] + [0.5] * 5, window=5, tolerance=1e-3)

    def test_still_improving(self) -> None:
        assert not plateaued(list(np.geomspace(1.0, 1e-3, 20)), window=5, tolerance=1e-3)


class TestTrain:
    """Tests for weight-only training."""

    def test_zero_steps_leaves_weights(self, square_model: Model, square_task: Task) -> None:
        """With no steps the weights are bitwise unchanged."""
        before = square_model.weights.copy()
        _, history = train(square_model, square_task, TrainingConfig(steps=0))

        check.is_true(np.array_equal(square_model.weights, before))
        check.equal(history.n_steps, 0)

    def test_loss_decreases(
        self, rect_task: Task, small_model_config: ModelConfig, quick_config: TrainingConfig
    ) -> None:
        model = Model(rect_task.input_signature, small_model_config)
        model.initialize(np.random.default_rng(3))
        _, history = train(model, rect_task, quick_config)

        check.equal(len(history.model_phase), 20)
        check.less(history.final_mse, history.model_phase[0])

    def test_signature_mismatch(self, small_model_config: ModelConfig) -> None:
        restricted = make_square_rect_task("square_to_rect", slot="restricted")
        full = make_square_rect_task("square_to_rect")
        model = Model(restricted.input_signature, small_model_config)

        with pytest.raises(TrainingError, match="inputs"):
            Trainer(model, full, TrainingConfig())

    def test_divergence_threshold(self, square_model: Model, square_task: Task) -> None:
        """A loss above the threshold raises DivergenceError."""
        config = TrainingConfig(steps=5, divergence_threshold=1e-12)

        with pytest.raises(DivergenceError, match="diverged") as excinfo:
            train(square_model, square_task, config)
        check.equal(excinfo.value.history.n_steps, 0)

    def test_non_finite_weights(self, square_model: Model, square_task: Task) -> None:
        square_model.set_weights(np.full(square_model.n_parameters, np.nan))

        with pytest.raises(DivergenceError):
            train(square_model, square_task, TrainingConfig(steps=1))


class TestDiscovery:
    """Tests for the alternating discovery loop."""

    def test_requires_slot(self, small_model_config: ModelConfig) -> None:
        task = make_square_rect_task("square_to_rect", slot="none")
        model = Model(task.input_signature, small_model_config)

        with pytest.raises(TrainingError, match="no order-parameter slot"):
            discover_order_parameters(model, task, TrainingConfig())

    def test_short_run_reports(
        self, square_model: Model, square_task: Task, quick_config: TrainingConfig
    ) -> None:
        result = discover_order_parameters(
            square_model, square_task, quick_config, group=cubic_group()
        )

        check.equal([s.label for s in result.snapshots], ["start", "middle", "end"])
        check.equal(result.history.blocks, 3)
        check.equal(len(result.history.input_phase), 9)
        check.equal(len(result.magnitudes), 4 * 70)
        check.equal(result.recovered_sites, [0, 1, 2, 3])
        check.equal(result.stabilizer_before.size, 16)
        check.is_true(result.stabilizer_after.issubset(result.stabilizer_before))
        # global sharing: every vertex sees the same order parameter
        for tensor in result.recovered[1:]:
            check.is_true(np.array_equal(tensor.coefficients, result.recovered[0].coefficients))

    def test_larger_sparsity_weight_shrinks_order_parameters(
        self, square_task: Task, small_model_config: ModelConfig, quick_config: TrainingConfig
    ) -> None:
        """A heavy L1 weight keeps every L > 0 component at exactly zero."""
        magnitudes = {}
        for lam in (0.0, 1e3):
            task = Task.model_validate({**square_task.__dict__, "lambda_sparsity": lam})
            model = Model(task.input_signature, small_model_config)
            model.initialize(np.random.default_rng(7))
            result = discover_order_parameters(model, task, quick_config)
            magnitudes[lam] = result.nonscalar_magnitude

        check.greater(magnitudes[0.0], 0.0)
        check.equal(magnitudes[1e3], 0.0)
        check.less(magnitudes[1e3], magnitudes[0.0])


class TestMagnitudes:
    """Tests for the component table."""

    def test_rows_are_labelled(self) -> None:
        signature = IrrepsSignature.parse("1x0e + 1x2e")
        tensor = GeometricTensor(signature=signature, coefficients=[0.1, 0, 0, 0, 0, 0.8])
        rows = magnitude_table([tensor], [4])

        check.equal(len(rows), 6)
        check.equal((rows[-1].site, rows[-1].L, rows[-1].parity, rows[-1].m), (4, 2, "e", 2))
        check.equal(dominant_component(rows), ((2, "e", 2), 0.8))
        check.almost_equal(component_share(rows, {(2, "e", 2)}), 1.0)

    def test_no_nonscalar_components(self) -> None:
        tensor = GeometricTensor(signature=IrrepsSignature.parse("1x0e"), coefficients=[1.0])

        with pytest.raises(ValueError, match="no L > 0"):
            dominant_component(magnitude_table([tensor], [0]))

    def test_nonscalar_magnitude_is_a_value(self) -> None:
        """The L > 0 total reads as a float and skips scalars."""
        signature = IrrepsSignature.parse("1x0e + 1x1o")
        tensor = GeometricTensor(signature=signature, coefficients=[5.0, 0.1, -0.2, 0.0])
        result = DiscoveryResult(
            order_parameters=np.zeros((1, 4)),
            recovered=[tensor],
            recovered_sites=[0],
            history=TrainingHistory(),
            magnitudes=magnitude_table([tensor], [0]),
        )

        check.is_instance(result.nonscalar_magnitude, float)
        check.almost_equal(result.nonscalar_magnitude, 0.3)
        check.less(result.nonscalar_magnitude, 1.0)


def test_penalty_nodes_are_scalars() -> None:
    node = sparsity_loss(ops.lift(np.ones((2, 3))), 1.0, IrrepsSignature.parse("1x1o"))

    assert node.value.shape == ()
