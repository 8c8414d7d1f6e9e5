"""Unit tests for edge geometry, the equivariant model and checkpoints."""

import json
from pathlib import Path

import numpy as np
import pytest
import pytest_check as check

from src.autodiff import Graph, forward, grad_check, ops
from src.irreps import IrrepsSignature, random_group_element
from src.models import Structure
from src.network import (
    CheckpointError,
    MinimumImageError,
    Model,
    ModelConfig,
    NetworkError,
    RadialRangeError,
    layer_forward,
    load_checkpoint,
    model_forward,
    neighbor_list,
    radial_basis,
    save_checkpoint,
)
from src.scenarios import SQUARE_VERTICES, make_perovskite_structure, square_structure
from src.symmetry import check_equivariance
from src.training import Task


@pytest.fixture
def slot_features(square_task: Task, rng: np.random.Generator) -> np.ndarray:
    """Square inputs with a random global order parameter.

    Returns:
        (4, input dim) feature array.
    """
    values = rng.normal(size=square_task.order_parameter_shape)
    return square_task.input_features(values)


class TestNeighborList:
    """Tests for edge construction."""

    def test_square_edges(self) -> None:
        """Sides (length 2) are in range, diagonals (2.83) are not."""
        edges = neighbor_list(square_structure(SQUARE_VERTICES), 2.5)

        check.equal(edges.n_edges, 8)
        check.is_true(np.allclose(edges.lengths, 2.0))
        check.equal([edges.degree(site) for site in range(4)], [2, 2, 2, 2])

    def test_edges_point_from_center_to_neighbor(self) -> None:
        structure = square_structure(SQUARE_VERTICES)
        edges = neighbor_list(structure, 2.5)
        for i, j, vector in edges.triples():
            check.is_true(np.allclose(vector, structure.positions[j] - structure.positions[i]))

    def test_minimum_image_limit(self) -> None:
        """r_cut at half the lattice vector raises MinimumImageError."""
        cell = Structure(positions=[[0.0, 0.0, 0.0]], species=("a",), lattice=2.0 * np.eye(3))

        with pytest.raises(MinimumImageError, match="half the shortest lattice vector"):
            neighbor_list(cell, 1.0)

    def test_periodic_images(self) -> None:
        """Two sites 0.5 apart across the boundary still see each other."""
        cell = Structure(
            positions=[[0.1, 0.0, 0.0], [1.6, 0.0, 0.0]],
            species=("a", "a"),
            lattice=2.0 * np.eye(3),
        )
        edges = neighbor_list(cell, 0.6)

        check.equal(edges.n_edges, 2)
        check.is_true(np.allclose(edges.lengths, 0.5))

    def test_cutoff_must_be_positive(self) -> None:
        with pytest.raises(NetworkError, match="positive"):
            neighbor_list(square_structure(SQUARE_VERTICES), 0.0)

    def test_perovskite_octahedra(self) -> None:
        """Every B site sees its six X neighbors at the bond length."""
        structure = make_perovskite_structure()
        edges = neighbor_list(structure, 0.9)
        species = np.asarray(structure.species)
        for site in range(8):
            mine = edges.centers == site
            bonded = mine & (species[edges.neighbors] == "X")
            check.equal(int(bonded.sum()), 6, f"site {site}")
            check.is_true(np.allclose(edges.lengths[bonded], 0.5))


class TestRadialBasis:
    """Tests for the smooth radial basis."""

    def test_vanishes_at_cutoff(self) -> None:
        assert np.allclose(radial_basis(2.5, 6, 2.5), 0.0)

    def test_inside_range_is_positive(self) -> None:
        values = radial_basis(np.linspace(0.1, 1.9, 10), 6, 2.5)

        check.equal(values.shape, (10, 6))
        check.is_true(np.all(values.max(axis=1) > 0.1))

    def test_rejects_out_of_range(self) -> None:
        """r = 0 raises RadialRangeError."""
        with pytest.raises(RadialRangeError):
            radial_basis(np.array([0.0, 1.0]), 6, 2.5)

    def test_peaks_at_its_center(self) -> None:
        """Away from the cutoff, function k peaks with value 1 at its center."""
        center = 2.5 / 6 * 3
        radii = np.array([center - 0.05, center, center + 0.05])
        values = radial_basis(radii, 6, 2.5)[:, 2]

        check.almost_equal(values[1], 1.0, abs=1e-12)
        check.less(values[0], values[1])
        check.less(values[2], values[1])
        check.equal(int(np.argmax(radial_basis(center, 6, 2.5))), 2)


class TestModel:
    """Tests for the forward pass and its symmetry."""

    def test_output_ladder(
        self, square_model: Model, square_task: Task, slot_features: np.ndarray
    ) -> None:
        signals = model_forward(square_model, square_task.structure, slot_features)

        check.equal(len(signals), 4)
        check.equal(str(signals[0].signature), "1x0e + 1x1o + 1x2e + 1x3o + 1x4e + 1x5o")

    def test_empty_input_rejected(self, small_model_config: ModelConfig) -> None:
        with pytest.raises(NetworkError, match="empty"):
            Model(IrrepsSignature(), small_model_config)

    def test_weight_count_checked(self, square_model: Model) -> None:
        with pytest.raises(NetworkError, match="weights for a model"):
            square_model.set_weights(np.zeros(3))

    def test_equivariant_under_o3(
        self,
        square_model: Model,
        square_task: Task,
        slot_features: np.ndarray,
        rng: np.random.Generator,
    ) -> None:
        """f(g x) = g f(x) for random rotations and inversions."""
        elements = [random_group_element(rng, include_inversion=True) for _ in range(6)]
        report = check_equivariance(
            square_model.forward,
            square_task.structure,
            slot_features,
            square_model.input_signature,
            square_model.output_signature,
            elements,
        )

        assert report.max_error < 1e-8

    def test_single_layer_equivariant(
        self,
        square_model: Model,
        square_task: Task,
        slot_features: np.ndarray,
        rng: np.random.Generator,
    ) -> None:
        layer = square_model.layers[0]
        geometry = square_model.geometry(square_task.structure)

        def forward_one(structure: Structure, features: np.ndarray) -> np.ndarray:
            return layer_forward(square_model, layer, features, square_model.geometry(structure))

        report = check_equivariance(
            forward_one,
            geometry.structure,
            slot_features,
            layer.in_signature,
            layer.out_signature,
            [random_group_element(rng, include_inversion=True) for _ in range(4)],
        )

        assert report.max_error < 1e-8

    def test_weight_gradients_match_finite_differences(
        self,
        square_model: Model,
        square_task: Task,
        slot_features: np.ndarray,
        rng: np.random.Generator,
    ) -> None:
        geometry = square_model.geometry(square_task.structure)
        graph = Graph(
            lambda v: ops.mse(
                square_model.apply(v["weights"], ops.lift(slot_features), geometry),
                square_task.targets,
            ),
            parameters=("weights",),
        )
        forward(graph, {"weights": square_model.weights})

        assert grad_check(graph, "weights", 12, 1e-6, rng, min_magnitude=1e-3) < 1e-4

    def test_permuting_sites_permutes_outputs(
        self, square_model: Model, square_task: Task, rng: np.random.Generator
    ) -> None:
        features = rng.normal(size=(4, square_model.input_signature.dim))
        order = np.array([2, 0, 3, 1])
        structure = square_task.structure

        outputs = square_model.forward(structure, features)
        reordered = square_model.forward(structure.permuted(order), features[order])

        np.testing.assert_allclose(reordered, outputs[order], atol=1e-12)

    def test_doubled_multiplicity_stays_equivariant(
        self,
        square_task: Task,
        small_model_config: ModelConfig,
        slot_features: np.ndarray,
        rng: np.random.Generator,
    ) -> None:
        config = small_model_config.model_copy(update={"hidden_mul": 4})
        model = Model(square_task.input_signature, config)
        model.initialize(np.random.default_rng(2))
        report = check_equivariance(
            model.forward,
            square_task.structure,
            slot_features,
            model.input_signature,
            model.output_signature,
            [random_group_element(rng, include_inversion=True) for _ in range(4)],
        )

        baseline = Model(square_task.input_signature, small_model_config)
        check.greater(model.n_parameters, baseline.n_parameters)
        check.less(report.max_error, 1e-8)

    def test_perovskite_equivariant(
        self, perovskite_task: Task, small_model_config: ModelConfig, rng: np.random.Generator
    ) -> None:
        """Periodic cells rotate with their lattice."""
        model = Model(
            perovskite_task.input_signature, small_model_config.model_copy(update={"r_cut": 0.9})
        )
        model.initialize(np.random.default_rng(4))
        values = rng.normal(size=perovskite_task.order_parameter_shape)
        report = check_equivariance(
            model.forward,
            perovskite_task.structure,
            perovskite_task.input_features(values),
            model.input_signature,
            model.output_signature,
            [random_group_element(rng, include_inversion=True) for _ in range(3)],
        )

        assert report.max_error < 1e-8


class TestCheckpoint:
    """Tests for JSON checkpoints."""

    def test_save_and_load(
        self, square_model: Model, square_task: Task, slot_features: np.ndarray, tmp_path: Path
    ) -> None:
        """Reloaded weights are bitwise equal and give the same outputs."""
        path = save_checkpoint(square_model, tmp_path / "model.ckpt", seeds={"weights": 11})
        restored, seeds = load_checkpoint(path)

        check.equal(seeds, {"weights": 11})
        check.is_true(np.array_equal(restored.weights, square_model.weights))
        check.is_true(
            np.array_equal(
                restored.forward(square_task.structure, slot_features),
                square_model.forward(square_task.structure, slot_features),
            )
        )

    def test_layout_mismatch(self, square_model: Model, tmp_path: Path) -> None:
        """An edited layout raises CheckpointError."""
        path = save_checkpoint(square_model, tmp_path / "model.ckpt")
        payload = json.loads(path.read_text())
        payload["layout"][0]["offset"] += 1
        path.write_text(json.dumps(payload))

        with pytest.raises(CheckpointError, match="layout"):
            load_checkpoint(path)

    def test_missing_file(self, tmp_path: Path) -> None:
        with pytest.raises(CheckpointError, match="Cannot read"):
            load_checkpoint(tmp_path / "absent.ckpt")

    def test_malformed_file(self, tmp_path: Path) -> None:
        path = tmp_path / "model.ckpt"
        path.write_text("{not json")

        with pytest.raises(CheckpointError, match="Malformed"):
            load_checkpoint(path)
