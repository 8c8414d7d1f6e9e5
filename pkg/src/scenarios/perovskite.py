"""Cubic ABX3 perovskite supercell with octahedral tilt targets.

The 2x2x2 supercell has unit cubic cells: B at the corners, A at the body
centers, X at the edge midpoints, so every X bridges exactly two B sites.
A tilt pattern assigns each B octahedron a small rotation pseudovector; the
X atoms move by the rotation of their bond vector, A and B stay put.

Only patterns whose neighbouring octahedra agree on the shared X are
supported, so the two contributions at each X are asserted equal.
"""

import logging
from enum import Enum
from itertools import product

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from src.harmonics import SphereGrid
from src.irreps import GeometricTensor, Irrep, IrrepsSignature, Parity
from src.models.structure import Structure
from src.scenarios.common import (
    TARGET_LMAX,
    InvalidTiltPatternError,
    ScenarioError,
    candidate_group,
    displacement_targets,
)
from src.symmetry import CandidateGroup
from src.training import Sharing, Task

logger = logging.getLogger(__name__)

SUPERCELL = (2, 2, 2)
SPECIES_KINDS = ("A", "B", "X")
BOND = 0.5
MAX_TILT_ANGLE = 0.2
# Two octahedra must agree on their shared X this closely.
SHARED_X_TOLERANCE = 1e-12


class TiltPattern(str, Enum):
    """Supported Glazer patterns.

    In-phase about x plus antiphase about y and z, or the antiphase pair alone.
    """

    A_PLUS_B_MINUS_B_MINUS = "a+b-b-"
    A_ZERO_B_MINUS_B_MINUS = "a0b-b-"


def parse_pattern(text: str | TiltPattern) -> TiltPattern:
    try:
        return TiltPattern(text)
    except ValueError as e:
        supported = ", ".join(p.value for p in TiltPattern)
        raise InvalidTiltPatternError(
            f"Unsupported tilt pattern {text!r} (expected {supported})"
        ) from e


class TiltSpec(BaseModel):
    """Tilt pattern and its two angles in radians."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    pattern: str = TiltPattern.A_PLUS_B_MINUS_B_MINUS.value
    theta_a: float = Field(default=0.1, ge=-MAX_TILT_ANGLE, le=MAX_TILT_ANGLE)
    theta_b: float = Field(default=0.1, ge=-MAX_TILT_ANGLE, le=MAX_TILT_ANGLE)
    supercell: tuple[int, int, int] = SUPERCELL

    @field_validator("supercell")
    @classmethod
    def check_supercell(cls, v: tuple[int, int, int]) -> tuple[int, int, int]:
        if tuple(v) != SUPERCELL:
            raise ValueError(f"only the {SUPERCELL} supercell is supported")
        return v


def cell_indices() -> list[tuple[int, int, int]]:
    return list(product(range(SUPERCELL[0]), range(SUPERCELL[1]), range(SUPERCELL[2])))


def make_perovskite_structure() -> Structure:
    """8 B, then 8 A, then 24 X sites (X grouped by cell, then by bond axis x, y, z)."""
    cells = np.array(cell_indices(), dtype=np.float64)
    b_sites = cells
    a_sites = cells + 0.5
    x_sites = np.array([cell + BOND * axis for cell in cells for axis in np.eye(3)])
    positions = np.concatenate([b_sites, a_sites, x_sites])
    species = ("B",) * len(b_sites) + ("A",) * len(a_sites) + ("X",) * len(x_sites)
    return Structure(
        positions=positions,
        species=species,
        lattice=np.diag(np.array(SUPERCELL, dtype=np.float64)),
        order_parameter_sites=tuple(range(len(b_sites))),
    )


def rotation_vectors(spec: TiltSpec) -> np.ndarray:
    """(8, 3) rotation pseudovector of every B octahedron, in B site order."""
    pattern = parse_pattern(spec.pattern)
    theta_a = spec.theta_a if pattern is TiltPattern.A_PLUS_B_MINUS_B_MINUS else 0.0
    rows = []
    for n1, n2, n3 in cell_indices():
        antiphase = (-1) ** (n1 + n2 + n3)
        in_phase = theta_a * (-1) ** (n2 + n3)
        rows.append([in_phase, spec.theta_b * antiphase, spec.theta_b * antiphase])
    return np.array(rows, dtype=np.float64)


def tilt_displacements(spec: TiltSpec) -> np.ndarray:
    """(40, 3) displacement of every site; only X atoms move.

    Raises:
        ScenarioError: If the two octahedra sharing an X disagree on its displacement.
    """
    omegas = rotation_vectors(spec)
    cells = cell_indices()
    b_index = {cell: i for i, cell in enumerate(cells)}
    n_b = len(cells)
    displacements = np.zeros((2 * n_b + 3 * n_b, 3))
    for c, cell in enumerate(cells):
        for axis in range(3):
            bond = BOND * np.eye(3)[axis]
            neighbor = list(cell)
            neighbor[axis] = (neighbor[axis] + 1) % SUPERCELL[axis]
            near = np.cross(omegas[b_index[cell]], bond)
            far = np.cross(omegas[b_index[tuple(neighbor)]], -bond)
            if np.linalg.norm(near - far) > SHARED_X_TOLERANCE:
                raise ScenarioError(f"Octahedra around X at cell {cell}, axis {axis} disagree")
            displacements[2 * n_b + 3 * c + axis] = 0.5 * (near + far)
    return displacements


def slot_signature(lmax: int = TARGET_LMAX) -> IrrepsSignature:
    return IrrepsSignature.all_parities(1, lmax)


def _pseudovector_entry(signature: IrrepsSignature) -> int:
    target = Irrep(degree=1, parity=Parity.EVEN)
    for entry, block in enumerate(signature.entries):
        if block.irrep == target:
            return entry
    raise ScenarioError(f"Signature {signature} has no pseudovector entry")


def constraint_mask(signature: IrrepsSignature) -> np.ndarray:
    """Ones everywhere except the x component of the pseudovector block."""
    mask = np.ones(signature.dim)
    entry = _pseudovector_entry(signature)
    for copy in range(signature.entries[entry].mul):
        mask[signature.component_index(entry, copy, 1)] = 0.0
    return mask


def sublattice_groups() -> tuple[int, ...]:
    """Tie group per B site: B sites that share no X get the same group."""
    return tuple((n1 + n2 + n3) % 2 for n1, n2, n3 in cell_indices())


def make_perovskite_task(
    spec: TiltSpec,
    constrained: bool = False,
    slot_lmax: int = TARGET_LMAX,
    lambda_sparsity: float = 1e-2,
    lambda_degree: float = 5e-3,
    grid: SphereGrid | None = None,
) -> Task:
    """Tilt task with order-parameter slots on the B sites.

    Unconstrained slots are independent per B site. The constrained variant
    pins the pseudovector's x component to zero and ties B sites of the same
    sublattice to one shared value.

    Raises:
        InvalidTiltPatternError: If the pattern is not supported.
    """
    pattern = parse_pattern(spec.pattern)
    structure = make_perovskite_structure()
    targets, target_signature = displacement_targets(tilt_displacements(spec), grid=grid)
    signature = slot_signature(slot_lmax)
    extra: dict = {"sharing": Sharing.PER_SITE}
    if constrained:
        extra = {
            "sharing": Sharing.CUSTOM,
            "tie_groups": sublattice_groups(),
            "component_mask": constraint_mask(signature),
        }
    name = f"perovskite {pattern.value}" + (" constrained" if constrained else "")
    logger.debug("Built %s with theta_a=%g, theta_b=%g", name, spec.theta_a, spec.theta_b)
    return Task(
        name=name,
        structure=structure,
        species_kinds=SPECIES_KINDS,
        slot_signature=signature,
        targets=targets,
        target_signature=target_signature,
        lambda_sparsity=lambda_sparsity,
        lambda_degree=lambda_degree,
        **extra,
    )


def pseudovectors(tensors: list[GeometricTensor]) -> np.ndarray:
    """(n, 3) Cartesian pseudovector (first 1e copy) of every tensor."""
    rows = []
    for tensor in tensors:
        y, z, x = tensor.block(_pseudovector_entry(tensor.signature))[0]
        rows.append([x, y, z])
    return np.array(rows)


class TiltComparison(BaseModel):
    """Best match between recovered pseudovectors and a reference pattern.

    Attributes:
        index: Candidate element mapping the reference onto the recovered field.
        sign: Sign of the fitted amplitude.
        scale: Fitted amplitude (recovered / reference).
        residual: Relative misfit after mapping and scaling.
    """

    index: int
    sign: int
    scale: float
    residual: float


def _site_map(positions: np.ndarray, moved: np.ndarray, lattice: np.ndarray) -> np.ndarray:
    fractional = (moved[:, None, :] - positions[None, :, :]) @ np.linalg.inv(lattice)
    distance = np.linalg.norm(fractional - np.round(fractional), axis=-1)
    return np.argmin(distance, axis=1)


def compare_tilt_pattern(
    recovered: np.ndarray | list[GeometricTensor],
    spec: TiltSpec,
    group: CandidateGroup | None = None,
) -> TiltComparison:
    """Match per-B pseudovectors against ``spec`` up to a group element and an amplitude.

    Each candidate element moves the reference field: the pseudovector at B
    site i becomes ``det(R) R w_i`` at the image of site i. The element with
    the smallest relative least-squares residual wins.
    """
    if isinstance(recovered, list):
        recovered = pseudovectors(recovered)
    recovered = np.asarray(recovered, dtype=np.float64)
    reference = rotation_vectors(spec)
    if not np.any(reference):
        raise ScenarioError("Reference tilt pattern is zero")
    structure = make_perovskite_structure()
    group = group or candidate_group(structure)
    b_positions = structure.positions[list(structure.order_parameter_sites)]
    norm = float(np.linalg.norm(recovered))

    best: TiltComparison | None = None
    for index, operation in enumerate(group):
        matrix = operation.matrix
        moved = operation.apply(b_positions, structure.lattice)
        image = _site_map(b_positions, moved, structure.lattice)
        mapped = np.zeros_like(reference)
        mapped[image] = np.linalg.det(matrix) * reference @ matrix.T
        scale = float(np.sum(recovered * mapped) / np.sum(mapped * mapped))
        misfit = float(np.linalg.norm(recovered - scale * mapped))
        residual = misfit / norm if norm > 0 else 1.0
        if best is None or residual < best.residual - 1e-12:
            best = TiltComparison(
                index=index, sign=1 if scale >= 0 else -1, scale=scale, residual=residual
            )
    logger.info(
        "Tilt pattern %s: best element %d, residual %.3e", spec.pattern, best.index, best.residual
    )
    return best
