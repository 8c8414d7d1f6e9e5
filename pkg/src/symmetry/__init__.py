"""Numerical symmetry analysis of configurations and equivariant maps.

Responsibilities:
    - CandidateGroup: closed finite sets of O(3) elements, optionally with
      fractional lattice translations, with multiplication table
    - stabilizer: elements leaving (positions, species, tensors) unchanged up
      to a permutation of sites
    - check_curie / check_combination / check_gradient_equivariance /
      check_equivariance: executable symmetry properties
    - diagnose_compatibility: symmetry an order parameter must break
"""

from src.symmetry.checks import (
    CompatibilityReport,
    CurieReport,
    EquivarianceReport,
    GradientEquivarianceReport,
    check_combination,
    check_curie,
    check_equivariance,
    check_gradient_equivariance,
    diagnose_compatibility,
    input_gradient,
)
from src.symmetry.groups import (
    CandidateGroup,
    GroupNotClosedError,
    SpaceOperation,
    SymmetryError,
    compose,
    cubic_group,
    cubic_supercell_group,
    signed_permutation_matrices,
)
from src.symmetry.stabilizer import (
    DEFAULT_TOLERANCE,
    LEARNED_TOLERANCE,
    StabilizerEntry,
    StabilizerReport,
    element_residual,
    stabilizer,
    tensor_stabilizer,
)

__all__ = [
    "DEFAULT_TOLERANCE",
    "LEARNED_TOLERANCE",
    "CandidateGroup",
    "CompatibilityReport",
    "CurieReport",
    "EquivarianceReport",
    "GradientEquivarianceReport",
    "GroupNotClosedError",
    "SpaceOperation",
    "StabilizerEntry",
    "StabilizerReport",
    "SymmetryError",
    "check_combination",
    "check_curie",
    "check_equivariance",
    "check_gradient_equivariance",
    "compose",
    "cubic_group",
    "cubic_supercell_group",
    "diagnose_compatibility",
    "element_residual",
    "input_gradient",
    "signed_permutation_matrices",
    "stabilizer",
    "tensor_stabilizer",
]
