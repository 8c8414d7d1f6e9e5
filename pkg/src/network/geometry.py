"""Edge geometry: neighbor lists, radial basis and cached filter couplings.

Edges are directed pairs (center i, neighbor j) with displacement
``r_j - r_i``; messages flow from neighbor to center. Periodic structures
use the minimum image, which requires ``r_cut`` below half of the shortest
lattice vector.
"""

import logging

import numpy as np
from pydantic import BaseModel, ConfigDict

from src.harmonics import sh_array
from src.irreps import wigner_3j
from src.models.structure import Structure

logger = logging.getLogger(__name__)

# Start of the cosine switching region, as a fraction of r_cut.
SWITCH_START = 0.8
_RANGE_TOLERANCE = 1e-12


class NetworkError(Exception):
    """Base error for model assembly and evaluation."""


class MinimumImageError(NetworkError):
    """Raised when r_cut is too large for the minimum-image convention."""


class RadialRangeError(NetworkError):
    """Raised when a radial function is queried outside (0, r_cut]."""


class NeighborList(BaseModel):
    """Directed edges of a structure within a cutoff radius.

    Attributes:
        centers: Receiving site of every edge.
        neighbors: Sending site of every edge.
        vectors: Displacement from center to neighbor, shape (E, 3).
        n_sites: Number of sites in the structure.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    centers: np.ndarray
    neighbors: np.ndarray
    vectors: np.ndarray
    n_sites: int

    @property
    def n_edges(self) -> int:
        return len(self.centers)

    @property
    def lengths(self) -> np.ndarray:
        return np.linalg.norm(self.vectors, axis=1)

    def degree(self, site: int) -> int:
        return int(np.count_nonzero(self.centers == site))

    def triples(self) -> list[tuple[int, int, np.ndarray]]:
        return [
            (int(i), int(j), d)
            for i, j, d in zip(self.centers, self.neighbors, self.vectors, strict=True)
        ]


def neighbor_list(structure: Structure, r_cut: float) -> NeighborList:
    """All pairs with ``0 < |r_j - r_i| <= r_cut``, both directions.

    Raises:
        NetworkError: If ``r_cut`` is not positive.
        MinimumImageError: If the structure is periodic and ``r_cut`` reaches
            half of the shortest lattice vector.
    """
    if r_cut <= 0:
        raise NetworkError(f"r_cut must be positive, got {r_cut}")

    positions = structure.positions
    displacements = positions[None, :, :] - positions[:, None, :]
    if structure.lattice is not None:
        lattice = structure.lattice
        shortest = float(np.linalg.norm(lattice, axis=1).min())
        if r_cut >= shortest / 2:
            raise MinimumImageError(
                f"r_cut {r_cut} must be below half the shortest lattice vector ({shortest / 2})"
            )
        fractional = displacements @ np.linalg.inv(lattice)
        fractional -= np.round(fractional)
        displacements = fractional @ lattice

    distances = np.linalg.norm(displacements, axis=-1)
    mask = (distances > 0) & (distances <= r_cut + _RANGE_TOLERANCE)
    centers, neighbors = np.nonzero(mask)
    logger.debug(
        "neighbor_list: %d sites, %d edges within %.3f", len(positions), len(centers), r_cut
    )
    return NeighborList(
        centers=centers,
        neighbors=neighbors,
        vectors=displacements[centers, neighbors],
        n_sites=len(positions),
    )


def cosine_cutoff(r: np.ndarray, r_cut: float) -> np.ndarray:
    """1 below ``SWITCH_START * r_cut``, then a half cosine down to 0 at r_cut."""
    start = SWITCH_START * r_cut
    phase = np.clip((r - start) / (r_cut - start), 0.0, 1.0)
    return 0.5 * (np.cos(np.pi * phase) + 1.0)


def radial_basis(r: np.ndarray | float, n_basis: int, r_cut: float) -> np.ndarray:
    """Gaussian basis with evenly spaced centers on (0, r_cut], times the cutoff.

    Centers sit at ``r_cut * k / B`` for k = 1..B and the width equals the
    spacing. Returns shape ``r.shape + (B,)``.

    Raises:
        RadialRangeError: If any ``r`` lies outside (0, r_cut].
    """
    r = np.asarray(r, dtype=np.float64)
    if np.any(r <= 0) or np.any(r > r_cut + _RANGE_TOLERANCE):
        raise RadialRangeError(f"radial_basis queried outside (0, {r_cut}]")
    spacing = r_cut / n_basis
    centers = spacing * np.arange(1, n_basis + 1)
    gaussians = np.exp(-(((r[..., None] - centers) / spacing) ** 2))
    return gaussians * cosine_cutoff(r, r_cut)[..., None]


class EdgeGeometry:
    """Per-structure constants shared by every layer of a model.

    Holds the neighbor list, unit directions, radial basis values and the
    filter coupling tensors ``K[e, i, k] = sum_j C[i, j, k] Y_j(r_e)``.
    """

    def __init__(self, structure: Structure, r_cut: float, n_basis: int, filter_lmax: int) -> None:
        self.structure = structure
        self.edges = neighbor_list(structure, r_cut)
        self.filter_lmax = filter_lmax
        lengths = self.edges.lengths
        if self.edges.n_edges:
            directions = self.edges.vectors / lengths[:, None]
            self.radial = radial_basis(lengths, n_basis, r_cut)
        else:
            directions = np.zeros((0, 3))
            self.radial = np.zeros((0, n_basis))
        self._harmonics = np.split(
            sh_array(filter_lmax, directions),
            np.cumsum([2 * degree + 1 for degree in range(filter_lmax)]),
            axis=-1,
        )
        self._couplings: dict[tuple[int, tuple[int, ...], int], np.ndarray] = {}

    @property
    def n_sites(self) -> int:
        return self.edges.n_sites

    @property
    def centers(self) -> np.ndarray:
        return self.edges.centers

    @property
    def neighbors(self) -> np.ndarray:
        return self.edges.neighbors

    @property
    def average_degree(self) -> float:
        return self.edges.n_edges / self.n_sites if self.n_sites else 0.0

    def harmonics(self, degree: int) -> np.ndarray:
        return self._harmonics[degree]

    def coupling(self, l_in: int, filter_degrees: tuple[int, ...], l_out: int) -> np.ndarray:
        """Stacked per-edge couplings, shape (E, len(filter_degrees), 2l_in+1, 2l_out+1)."""
        key = (l_in, filter_degrees, l_out)
        if key not in self._couplings:
            stacked = [
                np.einsum("ijk,ej->eik", wigner_3j(l_in, l_f, l_out), self.harmonics(l_f))
                for l_f in filter_degrees
            ]
            self._couplings[key] = np.stack(stacked, axis=1)
        return self._couplings[key]
