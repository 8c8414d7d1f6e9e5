"""Unit tests for sphere signals: evaluation, projection, sampling and peaks."""

from pathlib import Path

import numpy as np
import pandas as pd
import pytest
import pytest_check as check
from hypothesis import given, settings
from hypothesis import strategies as st

from src.harmonics import (
    HarmonicsError,
    NonUnitDirectionError,
    SphereGrid,
    default_grid,
    eval_sh,
    ladder,
    peak_vectors,
    project_points,
    sample_signal,
)
from src.irreps import GeometricTensor, IrrepsSignature, random_group_element, rep_apply
from src.scenarios import SQUARE_VERTICES


class TestEvalSh:
    """Tests for harmonic evaluation at one direction."""

    def test_north_pole(self) -> None:
        """At +z every m=0 component is 1 and the rest vanish."""
        signal = eval_sh(4, np.array([0.0, 0.0, 1.0]))
        signature = signal.signature
        for index, value in enumerate(signal.coefficients):
            _, _, m = signature.component_label(index)
            check.almost_equal(value, 1.0 if m == 0 else 0.0, abs=1e-14)

    def test_rejects_non_unit_direction(self) -> None:
        """A direction of length 2 raises NonUnitDirectionError."""
        with pytest.raises(NonUnitDirectionError, match="not a unit vector"):
            eval_sh(2, np.array([0.0, 0.0, 2.0]))

    def test_signature_is_natural_ladder(self) -> None:
        assert eval_sh(3, np.array([1.0, 0.0, 0.0])).signature == ladder(3)

    def test_x_axis_values(self) -> None:
        """At +x, L=1 reads (0, 0, 1) and the L=2 tail reads (-1/2, 0, sqrt(3)/2)."""
        x_axis = np.array([1.0, 0.0, 0.0])

        np.testing.assert_allclose(eval_sh(1, x_axis).coefficients[1:], [0, 0, 1], atol=1e-14)
        np.testing.assert_allclose(
            eval_sh(2, x_axis).coefficients[-3:], [-0.5, 0.0, np.sqrt(3) / 2], atol=1e-14
        )

    @settings(max_examples=20, deadline=None)
    @given(seed=st.integers(0, 2**31))
    def test_equivariant_under_o3(self, seed: int) -> None:
        """Y(g x) = rep(g) Y(x), with inversion acting through the natural parities."""
        rng = np.random.default_rng(seed)
        g = random_group_element(rng, include_inversion=True)
        direction = rng.normal(size=3)
        direction /= np.linalg.norm(direction)

        moved = eval_sh(5, g.matrix @ direction)
        expected = rep_apply(ladder(5), g, eval_sh(5, direction))

        np.testing.assert_allclose(moved.coefficients, expected.coefficients, atol=1e-10)


class TestSphereGrid:
    """Tests for the quadrature grid."""

    def test_weights_integrate_sphere_area(self) -> None:
        grid = SphereGrid.equiangular(16)

        assert grid.weights.sum() == pytest.approx(4 * np.pi, rel=1e-12)

    def test_harmonics_are_orthogonal(self) -> None:
        """Y_L . Y_L' integrates to 4 pi / (2L+1) delta for low degrees."""
        grid = SphereGrid.equiangular(16)
        rows = np.array([eval_sh(3, d).coefficients for d in grid.directions])
        gram = rows.T @ (rows * grid.weights[:, None])
        degrees = ladder(3).degrees_per_component()

        np.testing.assert_allclose(gram, np.diag(4 * np.pi / (2 * degrees + 1)), atol=1e-10)

    def test_resolution_floor(self) -> None:
        with pytest.raises(HarmonicsError, match="at least 2"):
            SphereGrid.equiangular(1)

    @pytest.mark.filterwarnings("error")
    def test_small_grid_builds_without_warnings(self) -> None:
        """Odd-order moments are skipped, not divided by zero."""
        grid = SphereGrid.equiangular(8)

        assert grid.weights.sum() == pytest.approx(4 * np.pi, rel=1e-12)


class TestProjectPoints:
    """Tests for the distance-weighted projection."""

    def test_single_vector_peaks_at_its_length(self) -> None:
        """The signal maximum sits on the vector and equals its length."""
        vector = np.array([-0.5, 0.5, 0.0])
        signal = project_points(vector[None], 5)
        peaks = peak_vectors(signal, default_grid())

        assert len(peaks) == 1
        np.testing.assert_allclose(peaks[0], vector, rtol=0.02, atol=0.02 * np.linalg.norm(vector))

    def test_empty_cloud_is_zero(self) -> None:
        signal = project_points(np.zeros((0, 3)), 3)

        check.equal(signal.signature, ladder(3))
        check.is_true(np.all(signal.coefficients == 0))

    def test_zero_vector_is_skipped(self) -> None:
        signal = project_points(np.zeros((1, 3)), 2)

        assert not np.any(signal.coefficients)

    def test_two_opposite_points_give_two_peaks(self) -> None:
        points = np.array([[0.0, 0.0, 1.0], [0.0, 0.0, -1.0]])
        peaks = peak_vectors(project_points(points, 4), default_grid())

        check.equal(len(peaks), 2)
        for peak in peaks:
            check.almost_equal(abs(peak[2]), 1.0, rel=0.02)

    def test_point_on_z_axis(self) -> None:
        """A point at (0, 0, 2) gives 2/3 on every m=0 component and nothing else."""
        signal = project_points(np.array([[0.0, 0.0, 2.0]]), 2)
        blocks = [signal.block(entry)[0] for entry in range(3)]

        for degree, block in enumerate(blocks):
            expected = np.zeros(2 * degree + 1)
            expected[degree] = 2.0 / 3.0
            check.is_true(np.allclose(block, expected, atol=1e-10), f"degree {degree}")

    def test_square_selection_rule(self) -> None:
        """The square's vertices only populate m=0 and m=4 of the even degrees."""
        signal = project_points(SQUARE_VERTICES, 4)
        signature = signal.signature
        for index, value in enumerate(signal.coefficients):
            entry, _, m = signature.component_label(index)
            degree = signature.entries[entry].irrep.degree
            allowed = degree in (0, 2, 4) and m in (0, 4)
            if allowed and m == 0:
                check.greater(abs(value), 1e-6, f"L={degree} m={m}")
            elif not allowed:
                check.almost_equal(value, 0.0, abs=1e-12, msg=f"L={degree} m={m}")
        check.greater(abs(signal.block(4)[0][8]), 1e-6)

    def test_equivariant_under_o3(self, rng: np.random.Generator) -> None:
        points = np.array([[1.2, 0.3, -0.4], [-0.2, 0.7, 0.1], [0.1, -0.5, -0.6]])
        signal = project_points(points, 4)
        for _ in range(4):
            g = random_group_element(rng, include_inversion=True)
            moved = project_points(points @ g.matrix.T, 4)
            expected = rep_apply(ladder(4), g, signal)
            check.is_true(np.allclose(moved.coefficients, expected.coefficients, rtol=1e-6))

    def test_invariant_under_point_order(self, rng: np.random.Generator) -> None:
        points = rng.normal(size=(6, 3))
        reordered = points[rng.permutation(6)]

        np.testing.assert_allclose(
            project_points(reordered, 4).coefficients,
            project_points(points, 4).coefficients,
            atol=1e-10,
        )


class TestSampling:
    """Tests for grid samples and their CSV export."""

    def test_constant_signal(self) -> None:
        signal = GeometricTensor(signature=ladder(0), coefficients=[2.5])
        samples = sample_signal(signal, SphereGrid.equiangular(8))

        assert np.allclose(samples.values, 2.5)

    def test_csv_columns(self, tmp_path: Path) -> None:
        """Columns theta, phi, value with one row per grid point."""
        grid = SphereGrid.equiangular(8)
        path = tmp_path / "signal.csv"
        sample_signal(eval_sh(2, np.array([1.0, 0.0, 0.0])), grid).to_csv(path)
        frame = pd.read_csv(path)

        check.equal(list(frame.columns), ["theta", "phi", "value"])
        check.equal(len(frame), 8 * 16)


class TestPeakVectors:
    """Tests for peak extraction."""

    def test_threshold_range(self) -> None:
        signal = project_points(np.array([[1.0, 0.0, 0.0]]), 2)

        with pytest.raises(HarmonicsError, match="rel_threshold"):
            peak_vectors(signal, default_grid(), rel_threshold=0.0)

    def test_non_ladder_signal_rejected(self) -> None:
        signal = GeometricTensor.zeros(IrrepsSignature.parse("1x1e"))

        with pytest.raises(HarmonicsError, match="ladder"):
            peak_vectors(signal, default_grid())

    def test_zero_signal_has_no_peaks(self) -> None:
        assert peak_vectors(GeometricTensor.zeros(ladder(3)), default_grid()) == []
