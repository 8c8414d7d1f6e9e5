"""Real irreducible representation algebra of O(3).

Responsibilities:
    - Irrep / IrrepsSignature layout conventions (m = -L..L, L=1 as y, z, x)
    - Wigner 3j coupling tensors from the exact Racah formula
    - Wigner D rotation matrices consistent with the real harmonics
    - Group elements (rotation vector + inversion flag) and their action

All values are immutable; coupling tables are cached read-only arrays.
"""

from src.irreps.basis import MAX_DEGREE, real_spherical_harmonics
from src.irreps.irrep import (
    GeometricTensor,
    GroupElement,
    IncompatibleDegreesError,
    Irrep,
    IrrepsError,
    IrrepsSignature,
    MulIrrep,
    Parity,
    SignatureMismatchError,
)
from src.irreps.wigner import (
    random_group_element,
    rep_apply,
    rep_apply_array,
    rep_matrix,
    satisfies_triangle,
    wigner_3j,
    wigner_D,
)

__all__ = [
    "MAX_DEGREE",
    "GeometricTensor",
    "GroupElement",
    "IncompatibleDegreesError",
    "Irrep",
    "IrrepsError",
    "IrrepsSignature",
    "MulIrrep",
    "Parity",
    "SignatureMismatchError",
    "random_group_element",
    "real_spherical_harmonics",
    "rep_apply",
    "rep_apply_array",
    "rep_matrix",
    "satisfies_triangle",
    "wigner_3j",
    "wigner_D",
]
