"""Numerical stabilizer of a configuration.

An element stabilizes a configuration (positions, species, per-site
tensors) when some permutation of the sites maps every transformed point
onto a point of the same species, and every transformed tensor onto the
tensor of its image, each within ``tol``. The permutation comes from an
optimal assignment on a species-aware distance matrix.
"""

import logging

import numpy as np
from pydantic import BaseModel, Field
from scipy.optimize import linear_sum_assignment

from src.irreps import IrrepsSignature
from src.models.structure import Structure
from src.symmetry.groups import CandidateGroup, SymmetryError

logger = logging.getLogger(__name__)

DEFAULT_TOLERANCE = 1e-6
LEARNED_TOLERANCE = 1e-3
# Added to distances between points of different species.
_SPECIES_PENALTY = 1e6


class StabilizerEntry(BaseModel):
    """One stabilizing element with its residual."""

    index: int
    rotation: tuple[float, float, float]
    inversion: bool
    translation: tuple[float, float, float]
    residual: float = Field(ge=0.0)


class StabilizerReport(BaseModel):
    """Elements of a candidate group that leave a configuration unchanged.

    Attributes:
        group: Name of the candidate group.
        group_size: Number of candidates tested.
        tolerance: Threshold applied to the residuals.
        elements: Stabilizing elements, in group order.
    """

    group: str
    group_size: int
    tolerance: float
    elements: list[StabilizerEntry]

    @property
    def indices(self) -> frozenset[int]:
        return frozenset(entry.index for entry in self.elements)

    @property
    def size(self) -> int:
        return len(self.elements)

    def __contains__(self, index: int) -> bool:
        return index in self.indices

    def issubset(self, other: "StabilizerReport") -> bool:
        return self.indices <= other.indices


def _site_displacements(
    moved: np.ndarray, positions: np.ndarray, lattice: np.ndarray | None
) -> np.ndarray:
    """(N, N, 3) displacements ``positions[j] - moved[i]``, minimum image if periodic."""
    delta = positions[None, :, :] - moved[:, None, :]
    if lattice is not None:
        fractional = delta @ np.linalg.inv(lattice)
        fractional -= np.round(fractional)
        delta = fractional @ lattice
    return delta


def element_residual(
    structure: Structure,
    tensors: np.ndarray,
    signature: IrrepsSignature,
    group: CandidateGroup,
    index: int,
) -> float:
    """Worst position or tensor mismatch of element ``index`` under the best site matching."""
    operation = group[index]
    moved = operation.apply(structure.positions, structure.lattice)
    distances = np.linalg.norm(
        _site_displacements(moved, structure.positions, structure.lattice), axis=-1
    )
    species = np.asarray(structure.species)
    cost = distances + _SPECIES_PENALTY * (species[:, None] != species[None, :])
    rows, columns = linear_sum_assignment(cost)
    position_error = float(cost[rows, columns].max(initial=0.0))

    tensor_error = 0.0
    if signature.dim:
        transformed = tensors @ group.rep_matrix(signature, index).T
        difference = transformed[rows] - tensors[columns]
        tensor_error = float(np.linalg.norm(difference, axis=-1).max(initial=0.0))
    return max(position_error, tensor_error)


def stabilizer(
    structure: Structure,
    tensors: np.ndarray | None,
    signature: IrrepsSignature,
    group: CandidateGroup,
    tol: float = DEFAULT_TOLERANCE,
) -> StabilizerReport:
    """Brute-force stabilizer of (positions, species, per-site tensors).

    Args:
        structure: Points, species and optional lattice.
        tensors: (N, signature.dim) per-site coefficients, or None for bare geometry.
        signature: Layout of the tensors.
        group: Closed candidate group.
        tol: Absolute tolerance on positions and tensor differences.

    Raises:
        SymmetryError: If ``tol`` is not positive or the tensors do not fit.
    """
    if tol <= 0:
        raise SymmetryError(f"tol must be positive, got {tol}")
    if tensors is None:
        tensors = np.zeros((structure.n_sites, signature.dim))
    tensors = np.asarray(tensors, dtype=np.float64).reshape(structure.n_sites, -1)
    if tensors.shape[1] != signature.dim:
        raise SymmetryError(
            f"Tensors of width {tensors.shape[1]} do not match signature {signature}"
        )
    if structure.lattice is None and any(any(op.translation) for op in group):
        raise SymmetryError("Translations need a periodic structure")

    entries = []
    for index, operation in enumerate(group):
        residual = (
            0.0 if index == 0 else element_residual(structure, tensors, signature, group, index)
        )
        if residual <= tol:
            entries.append(
                StabilizerEntry(
                    index=index,
                    rotation=operation.point.rotation,
                    inversion=operation.point.inversion,
                    translation=operation.translation,
                    residual=residual,
                )
            )
    logger.debug("Stabilizer in %s: %d of %d elements", group.name, len(entries), len(group))
    return StabilizerReport(
        group=group.name, group_size=len(group), tolerance=tol, elements=entries
    )


def tensor_stabilizer(
    tensor: np.ndarray,
    signature: IrrepsSignature,
    group: CandidateGroup,
    tol: float = DEFAULT_TOLERANCE,
) -> StabilizerReport:
    """Stabilizer of a single tensor placed at the origin."""
    origin = Structure(positions=np.zeros((1, 3)), species=("x",))
    return stabilizer(origin, np.reshape(tensor, (1, -1)), signature, group, tol)
