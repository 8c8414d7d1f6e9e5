"""Experiment constructors.

Responsibilities:
    - make_square_rect_task: four vertices deforming between a square and a
      rectangle, with a globally shared order-parameter slot
    - make_perovskite_structure / make_perovskite_task: periodic 2x2x2 ABX3
      supercell with octahedral tilt targets and B-site slots, optionally
      constrained to a symmetry-intermediate pattern
    - compare_tilt_pattern: match recovered pseudovectors to a tilt pattern
"""

from src.scenarios.common import (
    TARGET_LMAX,
    InvalidTiltPatternError,
    ScenarioError,
    candidate_group,
    displacement_targets,
)
from src.scenarios.perovskite import (
    SPECIES_KINDS,
    TiltComparison,
    TiltPattern,
    TiltSpec,
    compare_tilt_pattern,
    constraint_mask,
    make_perovskite_structure,
    make_perovskite_task,
    parse_pattern,
    pseudovectors,
    rotation_vectors,
    sublattice_groups,
    tilt_displacements,
)
from src.scenarios.square import (
    RECTANGLE_VERTICES,
    SQUARE_VERTICES,
    Direction,
    SlotChoice,
    make_square_rect_task,
    square_structure,
    vertex_displacements,
)

__all__ = [
    "RECTANGLE_VERTICES",
    "SPECIES_KINDS",
    "SQUARE_VERTICES",
    "TARGET_LMAX",
    "Direction",
    "InvalidTiltPatternError",
    "ScenarioError",
    "SlotChoice",
    "TiltComparison",
    "TiltPattern",
    "TiltSpec",
    "candidate_group",
    "compare_tilt_pattern",
    "constraint_mask",
    "displacement_targets",
    "make_perovskite_structure",
    "make_perovskite_task",
    "make_square_rect_task",
    "parse_pattern",
    "pseudovectors",
    "rotation_vectors",
    "square_structure",
    "sublattice_groups",
    "tilt_displacements",
    "vertex_displacements",
]
