"""Signals on the sphere: harmonic evaluation, point-cloud projection, sampling, peaks.

A sphere signal is a GeometricTensor over the natural-parity ladder
``0e + 1o + 2e + ...``; its value at a unit direction ``x`` is
``sum_J F_J . Y_J(x)``. Point clouds are encoded by weighing the harmonics
of each point by its distance from the origin, then rescaling the whole
signal so that its maximum equals the largest distance.
"""

import logging
from functools import lru_cache
from pathlib import Path

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict
from scipy.optimize import minimize

from src.irreps import GeometricTensor, IrrepsSignature, real_spherical_harmonics

logger = logging.getLogger(__name__)

DEFAULT_GRID_RES = 64
UNIT_TOLERANCE = 1e-9
# Points closer to the origin than this carry no direction and are skipped.
ZERO_LENGTH = 1e-12
# Grid values undershoot refined peaks; candidates are pre-filtered loosely.
_GRID_SLACK = 0.9


class HarmonicsError(Exception):
    """Base error for sphere-signal operations."""


class NonUnitDirectionError(HarmonicsError):
    """Raised when a direction is not normalized."""


class SphereGrid(BaseModel):
    """Equal-angle latitude-longitude grid with exact quadrature weights.

    ``n`` rings at the midpoints ``theta_j = pi (j + 1/2) / n`` and ``2n``
    meridians. Ring weights integrate polynomials in ``cos(theta)`` of
    degree < n exactly (Fejer's first rule), so products of harmonics up to
    L = n/2 - 1 are integrated exactly.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    n: int
    theta: np.ndarray
    phi: np.ndarray
    directions: np.ndarray
    weights: np.ndarray

    @classmethod
    def equiangular(cls, n: int = DEFAULT_GRID_RES) -> "SphereGrid":
        if n < 2:
            raise HarmonicsError(f"Grid resolution must be at least 2, got {n}")
        theta_rings = np.pi * (np.arange(n) + 0.5) / n
        phi_meridians = 2 * np.pi * np.arange(2 * n) / (2 * n)

        orders = np.arange(n)
        even = orders % 2 == 0
        moments = np.zeros(n)
        moments[even] = 2.0 / (1.0 - orders[even].astype(float) ** 2)
        ring_weights = np.linalg.solve(np.cos(np.outer(orders, theta_rings)), moments)

        theta, phi = np.meshgrid(theta_rings, phi_meridians, indexing="ij")
        directions = np.stack(
            [np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)], axis=-1
        ).reshape(-1, 3)
        weights = np.repeat(ring_weights, 2 * n) * (2 * np.pi / (2 * n))
        return cls(
            n=n,
            theta=theta.reshape(-1),
            phi=phi.reshape(-1),
            directions=directions,
            weights=weights,
        )

    @property
    def shape(self) -> tuple[int, int]:
        return self.n, 2 * self.n


@lru_cache(maxsize=8)
def default_grid(n: int = DEFAULT_GRID_RES) -> SphereGrid:
    """Shared read-only grid instance per resolution."""
    return SphereGrid.equiangular(n)


def ladder(lmax: int) -> IrrepsSignature:
    return IrrepsSignature.natural_ladder(lmax)


def ladder_lmax(signature: IrrepsSignature) -> int:
    """Degree of the top rung; raises if ``signature`` is not a ladder."""
    lmax = signature.lmax
    if signature != ladder(lmax):
        raise HarmonicsError(f"{signature} is not a natural-parity ladder")
    return lmax


def sh_array(lmax: int, directions: np.ndarray) -> np.ndarray:
    """Stacked harmonics up to ``lmax`` for unit rows, shape (..., (lmax+1)^2)."""
    return np.concatenate(real_spherical_harmonics(lmax, directions), axis=-1)


def eval_sh(lmax: int, direction: np.ndarray) -> GeometricTensor:
    """Real harmonics ``[Y_0(x), ..., Y_lmax(x)]`` at a unit direction.

    Raises:
        NonUnitDirectionError: If ``|direction|`` differs from 1 by more than 1e-9.
    """
    direction = np.asarray(direction, dtype=np.float64)
    if abs(np.linalg.norm(direction) - 1.0) > UNIT_TOLERANCE:
        raise NonUnitDirectionError(f"Direction {direction.tolist()} is not a unit vector")
    return GeometricTensor(signature=ladder(lmax), coefficients=sh_array(lmax, direction))


def _evaluate(coefficients: np.ndarray, lmax: int, directions: np.ndarray) -> np.ndarray:
    return sh_array(lmax, directions) @ coefficients


def _refine_maximum(
    coefficients: np.ndarray, lmax: int, start: np.ndarray
) -> tuple[np.ndarray, float]:
    """Local ascent on the sphere from ``start``; returns (direction, value)."""

    def negative(v: np.ndarray) -> float:
        return -float(_evaluate(coefficients, lmax, v / np.linalg.norm(v)))

    result = minimize(negative, start, method="BFGS", options={"gtol": 1e-12})
    candidate = result.x / np.linalg.norm(result.x)
    value = -float(result.fun)
    start_value = float(_evaluate(coefficients, lmax, start))
    if start_value >= value:
        return start, start_value
    return candidate, value


def signal_maximum(
    coefficients: np.ndarray,
    lmax: int,
    grid: SphereGrid | None = None,
    seeds: np.ndarray | None = None,
) -> float:
    """Maximum over the sphere: best of grid and seed directions, refined locally."""
    grid = grid or default_grid()
    candidates = grid.directions
    if seeds is not None and len(seeds):
        candidates = np.concatenate([candidates, seeds], axis=0)
    values = _evaluate(coefficients, lmax, candidates)
    best = int(np.argmax(values))
    _, value = _refine_maximum(coefficients, lmax, candidates[best])
    return max(value, float(values[best]))


def project_points(
    points: np.ndarray, lmax: int, grid: SphereGrid | None = None
) -> GeometricTensor:
    """Spherical harmonic projection of a point cloud around the origin.

    Each point contributes ``|r| Y(r/|r|)``; the sum is scaled so that the
    maximum of the reconstructed function equals ``max |r|``. Zero vectors
    are skipped; an empty cloud gives the zero signal.
    """
    signature = ladder(lmax)
    points = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    lengths = np.linalg.norm(points, axis=1)
    keep = lengths > ZERO_LENGTH
    if not keep.any():
        return GeometricTensor.zeros(signature)
    points, lengths = points[keep], lengths[keep]
    directions = points / lengths[:, None]

    coefficients = lengths @ sh_array(lmax, directions)
    peak = signal_maximum(coefficients, lmax, grid=grid, seeds=directions)
    return GeometricTensor(signature=signature, coefficients=coefficients * (lengths.max() / peak))


class SignalSamples(BaseModel):
    """Values of a sphere signal on grid directions."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    theta: np.ndarray
    phi: np.ndarray
    directions: np.ndarray
    values: np.ndarray

    def pairs(self) -> list[tuple[np.ndarray, float]]:
        return [(d, float(v)) for d, v in zip(self.directions, self.values, strict=True)]

    def to_frame(self) -> pd.DataFrame:
        """Columns ``theta, phi, value`` (radians, polar angle first)."""
        return pd.DataFrame({"theta": self.theta, "phi": self.phi, "value": self.values})

    def to_csv(self, path: Path) -> None:
        path.parent.mkdir(parents=True, exist_ok=True)
        self.to_frame().to_csv(path, index=False, float_format="%.12g")


def sample_signal(signal: GeometricTensor, grid: SphereGrid) -> SignalSamples:
    """Evaluate ``signal`` at every grid direction."""
    lmax = ladder_lmax(signal.signature)
    return SignalSamples(
        theta=grid.theta,
        phi=grid.phi,
        directions=grid.directions,
        values=_evaluate(signal.coefficients, lmax, grid.directions),
    )


def _grid_local_maxima(values: np.ndarray, n_theta: int, n_phi: int) -> np.ndarray:
    """Flat indices of grid cells not smaller than any neighbor."""
    grid_values = values.reshape(n_theta, n_phi)
    # Pad rows across the poles with the meridian half a turn away.
    half = n_phi // 2
    padded = np.concatenate(
        [
            np.roll(grid_values[:1], half, axis=1),
            grid_values,
            np.roll(grid_values[-1:], half, axis=1),
        ]
    )
    is_max = np.ones_like(grid_values, dtype=bool)
    for d_theta in (-1, 0, 1):
        shifted_rows = padded[1 + d_theta : 1 + d_theta + n_theta]
        for d_phi in (-1, 0, 1):
            if d_theta == 0 and d_phi == 0:
                continue
            is_max &= grid_values >= np.roll(shifted_rows, -d_phi, axis=1)
    return np.flatnonzero(is_max.reshape(-1))


def peak_vectors(
    signal: GeometricTensor, grid: SphereGrid, rel_threshold: float = 0.9
) -> list[np.ndarray]:
    """Maxima of the signal read back as vectors (direction times value).

    Keeps local maxima whose refined value is at least ``rel_threshold`` times
    the global maximum; peaks closer than two grid cells are merged.
    """
    if not 0 < rel_threshold <= 1:
        raise HarmonicsError(f"rel_threshold must be in (0, 1], got {rel_threshold}")
    lmax = ladder_lmax(signal.signature)
    coefficients = signal.coefficients
    values = _evaluate(coefficients, lmax, grid.directions)
    if values.max() <= ZERO_LENGTH:
        return []

    n_theta, n_phi = grid.shape
    candidates = _grid_local_maxima(values, n_theta, n_phi)
    candidates = candidates[values[candidates] >= rel_threshold * values.max() * _GRID_SLACK]
    refined = [_refine_maximum(coefficients, lmax, grid.directions[i]) for i in candidates]
    if not refined:
        return []
    top = max(value for _, value in refined)

    merge_angle = 2 * np.pi / n_theta
    peaks: list[tuple[np.ndarray, float]] = []
    for direction, value in sorted(refined, key=lambda item: -item[1]):
        if value < rel_threshold * top:
            continue
        if any(np.arccos(np.clip(direction @ kept, -1, 1)) < merge_angle for kept, _ in peaks):
            continue
        peaks.append((direction, value))
    return [direction * value for direction, value in peaks]

