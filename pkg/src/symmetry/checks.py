"""Executable symmetry properties of equivariant maps and their losses.

- check_equivariance: f(g . x) = g . f(x) for a model forward pass
- check_curie: Sym(input) is contained in Sym(output)
- check_combination: Sym(x) ∩ Sym(y) stabilizes any linear combination
- check_gradient_equivariance: the gradient of an invariant loss transforms
  like its argument
- diagnose_compatibility: elements of Sym(input) missing from Sym(target),
  i.e. the symmetry an order parameter has to break
"""

import logging
from collections.abc import Callable, Sequence

import numpy as np
from pydantic import BaseModel

from src.autodiff import Graph, Node, value_and_grad
from src.irreps import GroupElement, IrrepsSignature, rep_apply_array
from src.models.structure import Structure
from src.symmetry.groups import CandidateGroup
from src.symmetry.stabilizer import (
    DEFAULT_TOLERANCE,
    LEARNED_TOLERANCE,
    StabilizerReport,
    stabilizer,
    tensor_stabilizer,
)

logger = logging.getLogger(__name__)

ForwardFn = Callable[[Structure, np.ndarray], np.ndarray]
LossFn = Callable[[Node, np.ndarray], Node]

# Gradients smaller than this count as zero for the relative error.
_ZERO_GRADIENT = 1e-300


class EquivarianceReport(BaseModel):
    """Relative deviation of f(g . x) from g . f(x), per tested element."""

    errors: list[float]

    @property
    def max_error(self) -> float:
        return max(self.errors, default=0.0)


class CurieReport(BaseModel):
    """Stabilizers of a cause and its effect, and the elements lost in between."""

    input: StabilizerReport
    output: StabilizerReport
    violations: list[int]

    @property
    def holds(self) -> bool:
        return not self.violations


class GradientEquivarianceReport(BaseModel):
    """Deviation between the transformed gradient and the gradient at the transformed point.

    ``relative`` is False when the reference gradient vanished and the error
    is absolute.
    """

    error: float
    relative: bool


class CompatibilityReport(BaseModel):
    """Symmetry lost between input configuration and target."""

    input: StabilizerReport
    target: StabilizerReport
    lost: list[int]

    @property
    def compatible(self) -> bool:
        return not self.lost


def check_equivariance(
    forward: ForwardFn,
    structure: Structure,
    features: np.ndarray,
    input_signature: IrrepsSignature,
    output_signature: IrrepsSignature,
    elements: Sequence[GroupElement],
) -> EquivarianceReport:
    """Compare ``forward(g.structure, g.features)`` with ``g.forward(structure, features)``."""
    reference = forward(structure, features)
    scale = max(float(np.linalg.norm(reference)), _ZERO_GRADIENT)
    errors = []
    for g in elements:
        moved_features = rep_apply_array(input_signature, g, features)
        moved = forward(structure.transformed(g.matrix), moved_features)
        expected = rep_apply_array(output_signature, g, reference)
        errors.append(float(np.linalg.norm(moved - expected)) / scale)
    report = EquivarianceReport(errors=errors)
    logger.info(
        "Equivariance over %d elements: max relative error %.3e", len(errors), report.max_error
    )
    return report


def check_curie(
    forward: ForwardFn,
    structure: Structure,
    features: np.ndarray,
    input_signature: IrrepsSignature,
    output_signature: IrrepsSignature,
    group: CandidateGroup,
    tol_input: float = DEFAULT_TOLERANCE,
    tol_output: float = LEARNED_TOLERANCE,
) -> CurieReport:
    """Elements of Sym(input) that do not stabilize the output (empty for equivariant maps)."""
    output = forward(structure, features)
    sym_in = stabilizer(structure, features, input_signature, group, tol_input)
    sym_out = stabilizer(structure, output, output_signature, group, tol_output)
    violations = sorted(sym_in.indices - sym_out.indices)
    logger.info(
        "Curie check in %s: |Sym(in)|=%d, |Sym(out)|=%d, %d violations",
        group.name,
        sym_in.size,
        sym_out.size,
        len(violations),
    )
    for index in violations:
        logger.warning("Element %d stabilizes the input but not the output", index)
    return CurieReport(input=sym_in, output=sym_out, violations=violations)


def check_combination(
    x: np.ndarray,
    y: np.ndarray,
    alpha: float,
    beta: float,
    signature: IrrepsSignature,
    group: CandidateGroup,
    tol: float = DEFAULT_TOLERANCE,
) -> bool:
    """Whether Sym(x) ∩ Sym(y) ⊆ Sym(alpha x + beta y).

    Residuals of the combination are bounded by ``|alpha| + |beta|`` times
    those of its parts, so the combination is checked with the tolerance
    scaled accordingly.
    """
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    common = (
        tensor_stabilizer(x, signature, group, tol).indices
        & tensor_stabilizer(y, signature, group, tol).indices
    )
    combined_tol = max(abs(alpha) + abs(beta), 1.0) * tol
    combined = tensor_stabilizer(alpha * x + beta * y, signature, group, combined_tol).indices
    missing = common - combined
    if missing:
        logger.warning("Combination lost elements %s", sorted(missing))
    return not missing


def input_gradient(loss: LossFn, x: np.ndarray, y_true: np.ndarray) -> np.ndarray:
    """Gradient of ``loss(x; y_true)`` with respect to ``x``."""
    x = np.asarray(x, dtype=np.float64)
    y_true = np.asarray(y_true, dtype=np.float64)
    graph = Graph(lambda leaves: loss(leaves["x"], y_true), parameters=(), inputs=("x",))
    _, gradients = value_and_grad(graph, {"x": x})
    return gradients["x"]


def check_gradient_equivariance(
    loss: LossFn,
    x: np.ndarray,
    y_true: np.ndarray,
    signature: IrrepsSignature,
    g: GroupElement,
) -> GradientEquivarianceReport:
    """Relative gap between grad L(g x; g y) and g . grad L(x; y).

    Real irrep matrices are orthogonal, so the contragredient action on the
    gradient is the action itself.
    """
    x = np.asarray(x, dtype=np.float64)
    y_true = np.asarray(y_true, dtype=np.float64)
    reference = input_gradient(loss, x, y_true)
    moved = input_gradient(
        loss, rep_apply_array(signature, g, x), rep_apply_array(signature, g, y_true)
    )
    gap = float(np.linalg.norm(moved - rep_apply_array(signature, g, reference)))
    norm = float(np.linalg.norm(reference))
    if norm < _ZERO_GRADIENT:
        logger.warning("Zero reference gradient; reporting absolute error")
        return GradientEquivarianceReport(error=gap, relative=False)
    return GradientEquivarianceReport(error=gap / norm, relative=True)


def diagnose_compatibility(
    structure: Structure,
    inputs: np.ndarray,
    input_signature: IrrepsSignature,
    targets: np.ndarray,
    target_signature: IrrepsSignature,
    group: CandidateGroup,
    tol: float = DEFAULT_TOLERANCE,
) -> CompatibilityReport:
    """Elements of Sym(input) absent from Sym(target).

    A non-empty result means no equivariant model can map the input onto the
    target; an order parameter has to break exactly these elements.
    """
    sym_in = stabilizer(structure, inputs, input_signature, group, tol)
    sym_target = stabilizer(structure, targets, target_signature, group, tol)
    lost = sorted(sym_in.indices - sym_target.indices)
    logger.info(
        "Compatibility in %s: |Sym(in)|=%d, |Sym(target)|=%d, %d lost",
        group.name,
        sym_in.size,
        sym_target.size,
        len(lost),
    )
    return CompatibilityReport(input=sym_in, target=sym_target, lost=lost)
