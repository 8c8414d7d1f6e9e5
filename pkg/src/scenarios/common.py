"""Shared scenario helpers: errors, displacement targets and candidate groups."""

import numpy as np

from src.harmonics import SphereGrid, ladder, project_points
from src.irreps import IrrepsSignature
from src.models.structure import Structure
from src.symmetry import CandidateGroup, cubic_group, cubic_supercell_group

TARGET_LMAX = 5


class ScenarioError(Exception):
    """Base error for scenario construction."""


class InvalidTiltPatternError(ScenarioError):
    """Raised for tilt patterns outside the supported set."""


def displacement_targets(
    displacements: np.ndarray, lmax: int = TARGET_LMAX, grid: SphereGrid | None = None
) -> tuple[np.ndarray, IrrepsSignature]:
    """Project every site's displacement vector; zero vectors give zero signals."""
    rows = [
        project_points(vector[None, :], lmax, grid=grid).coefficients for vector in displacements
    ]
    return np.array(rows), ladder(lmax)


def candidate_group(structure: Structure) -> CandidateGroup:
    """Cubic point group for finite clouds, the 384-element supercell group otherwise."""
    if structure.lattice is None:
        return cubic_group()
    return cubic_supercell_group(structure.lattice)
