"""Four points in the xy plane deforming between a square and a 3:1 rectangle.

The square has mirror planes on the x and y axes, so the symmetry broken on
the way to the rectangle shows up as x^2 - y^2 type components. Vertices are
listed in matching order in both shapes.
"""

import logging
from enum import Enum

import numpy as np

from src.harmonics import SphereGrid
from src.irreps import IrrepsSignature
from src.models.structure import Structure
from src.scenarios.common import TARGET_LMAX, displacement_targets
from src.training import Sharing, Task

logger = logging.getLogger(__name__)

SQUARE_VERTICES = np.array(
    [[1.0, 1.0, 0.0], [-1.0, 1.0, 0.0], [-1.0, -1.0, 0.0], [1.0, -1.0, 0.0]]
)
RECTANGLE_VERTICES = np.array(
    [[1.5, 0.5, 0.0], [-1.5, 0.5, 0.0], [-1.5, -0.5, 0.0], [1.5, -0.5, 0.0]]
)
SPECIES = "x"


class Direction(str, Enum):
    SQUARE_TO_RECT = "square_to_rect"
    RECT_TO_SQUARE = "rect_to_square"


class SlotChoice(str, Enum):
    """Order-parameter slot offered to discovery."""

    FULL = "full"
    RESTRICTED = "restricted"
    NONE = "none"


def slot_signature(choice: SlotChoice, lmax: int = TARGET_LMAX) -> IrrepsSignature:
    """Every (L, parity) with 1 <= L <= lmax, ``1e + 1o + 2e + 2o``, or nothing."""
    if choice is SlotChoice.FULL:
        return IrrepsSignature.all_parities(1, lmax)
    if choice is SlotChoice.RESTRICTED:
        return IrrepsSignature.all_parities(1, 2)
    return IrrepsSignature()


def square_structure(vertices: np.ndarray = SQUARE_VERTICES) -> Structure:
    return Structure(
        positions=vertices,
        species=(SPECIES,) * len(vertices),
        order_parameter_sites=tuple(range(len(vertices))),
    )


def make_square_rect_task(
    direction: Direction | str,
    slot: SlotChoice | str = SlotChoice.FULL,
    lambda_sparsity: float = 1e-2,
    lambda_degree: float = 0.0,
    grid: SphereGrid | None = None,
) -> Task:
    """Task mapping one shape's vertices to their displacement toward the other.

    Args:
        direction: Which shape is the input geometry.
        slot: Order-parameter slot carried by all four vertices, shared globally.
        lambda_sparsity: L1 weight on L > 0 slot components.
        lambda_degree: Degree penalty weight.
        grid: Grid used to rescale the projected targets.
    """
    direction = Direction(direction)
    slot = SlotChoice(slot)
    start = SQUARE_VERTICES if direction is Direction.SQUARE_TO_RECT else RECTANGLE_VERTICES
    targets, target_signature = displacement_targets(vertex_displacements(direction), grid=grid)
    logger.debug("Built %s targets for %d vertices", direction.value, len(start))
    return Task(
        name=direction.value,
        structure=square_structure(start),
        species_kinds=(SPECIES,),
        slot_signature=slot_signature(slot),
        sharing=Sharing.GLOBAL,
        targets=targets,
        target_signature=target_signature,
        lambda_sparsity=lambda_sparsity,
        lambda_degree=lambda_degree,
    )


def vertex_displacements(direction: Direction | str) -> np.ndarray:
    """Displacement of each vertex, in vertex order."""
    if Direction(direction) is Direction.SQUARE_TO_RECT:
        return RECTANGLE_VERTICES - SQUARE_VERTICES
    return SQUARE_VERTICES - RECTANGLE_VERTICES
