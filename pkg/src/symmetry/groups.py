"""Finite candidate groups of O(3) elements, optionally with lattice translations.

A candidate element acts on a point ``r`` as ``r -> R r + t`` where ``R`` is
the full orthogonal matrix of its GroupElement and ``t`` a translation given
in fractional coordinates of the lattice. For finite structures every
translation is zero. Groups are generated by closure from generators and
keep their multiplication table.
"""

import logging
from collections.abc import Iterable, Iterator, Sequence
from itertools import product

import numpy as np
from pydantic import BaseModel, ConfigDict

from src.irreps import GroupElement, IrrepsSignature, rep_matrix

logger = logging.getLogger(__name__)

# Decimal places used to identify matrices and fractional translations.
_KEY_DECIMALS = 6


class SymmetryError(Exception):
    """Base error for symmetry analysis."""


class GroupNotClosedError(SymmetryError):
    """Raised when a candidate set is not a group."""


class SpaceOperation(BaseModel):
    """Point operation followed by a fractional translation."""

    model_config = ConfigDict(frozen=True)

    point: GroupElement
    translation: tuple[float, float, float] = (0.0, 0.0, 0.0)

    @property
    def matrix(self) -> np.ndarray:
        return self.point.matrix

    def cartesian_translation(self, lattice: np.ndarray | None) -> np.ndarray:
        if lattice is None:
            return np.zeros(3)
        return np.asarray(self.translation) @ lattice

    def apply(self, positions: np.ndarray, lattice: np.ndarray | None) -> np.ndarray:
        return positions @ self.matrix.T + self.cartesian_translation(lattice)


def _fractional_rotation(matrix: np.ndarray, lattice: np.ndarray | None) -> np.ndarray:
    """Row-vector operator of ``matrix`` in fractional coordinates."""
    if lattice is None:
        return matrix.T
    return lattice @ matrix.T @ np.linalg.inv(lattice)


def _wrap(fractional: np.ndarray) -> np.ndarray:
    wrapped = np.round(np.mod(fractional, 1.0), _KEY_DECIMALS)
    return np.where(wrapped >= 1.0, 0.0, wrapped) + 0.0


def compose(
    first: SpaceOperation, second: SpaceOperation, lattice: np.ndarray | None
) -> SpaceOperation:
    """``first ∘ second``: apply ``second`` then ``first``."""
    translation = np.asarray(second.translation) @ _fractional_rotation(first.matrix, lattice)
    translation = _wrap(translation + np.asarray(first.translation))
    return SpaceOperation(
        point=first.point.compose(second.point),
        translation=tuple(float(v) for v in translation),
    )


def _array_key(matrix: np.ndarray, translation: np.ndarray) -> tuple:
    rounded = np.round(matrix, _KEY_DECIMALS) + 0.0
    return tuple(rounded.reshape(-1)) + tuple(_wrap(translation))


def _key(operation: SpaceOperation) -> tuple:
    return _array_key(operation.matrix, np.asarray(operation.translation))


class CandidateGroup:
    """Closed finite list of space operations with its multiplication table.

    Attributes:
        operations: Elements, identity first.
        lattice: Lattice the translations refer to (None for point groups).
        table: ``table[i, j]`` is the index of ``operations[i] ∘ operations[j]``.
        name: Label used in reports.
    """

    def __init__(
        self,
        operations: Sequence[SpaceOperation],
        lattice: np.ndarray | None = None,
        name: str = "candidate",
    ) -> None:
        self.operations = list(operations)
        self.lattice = None if lattice is None else np.asarray(lattice, dtype=np.float64)
        self.name = name
        self._index = {_key(op): i for i, op in enumerate(self.operations)}
        if len(self._index) != len(self.operations):
            raise GroupNotClosedError(f"{name}: duplicate elements")
        self.table = self._closure_table()
        self._rep_cache: dict[tuple[IrrepsSignature, int], np.ndarray] = {}

    def _closure_table(self) -> np.ndarray:
        identity = SpaceOperation(point=GroupElement.identity())
        if self._index.get(_key(identity)) != 0:
            raise GroupNotClosedError(f"{self.name}: identity must be the first element")
        size = len(self.operations)
        matrices = np.array([op.matrix for op in self.operations])
        translations = np.array([op.translation for op in self.operations], dtype=np.float64)
        table = np.empty((size, size), dtype=int)
        for i in range(size):
            frame = _fractional_rotation(matrices[i], self.lattice)
            products = matrices[i] @ matrices
            shifted = translations @ frame + translations[i]
            for j in range(size):
                k = self._index.get(_array_key(products[j], shifted[j]))
                if k is None:
                    raise GroupNotClosedError(
                        f"{self.name}: product of elements {i} and {j} is not in the set"
                    )
                table[i, j] = k
        if not np.all(np.any(table == 0, axis=1)):
            raise GroupNotClosedError(f"{self.name}: some element has no inverse")
        return table

    @classmethod
    def generate(
        cls,
        generators: Iterable[SpaceOperation],
        lattice: np.ndarray | None = None,
        name: str = "generated",
    ) -> "CandidateGroup":
        """Close a set of generators under composition."""
        generators = list(generators)
        full = [SpaceOperation(point=GroupElement.identity())]
        seen = {_key(full[0])}
        for element in full:
            for generator in generators:
                product_op = compose(element, generator, lattice)
                key = _key(product_op)
                if key not in seen:
                    seen.add(key)
                    full.append(product_op)
        logger.debug("Generated %s with %d elements", name, len(full))
        return cls(full, lattice=lattice, name=name)

    def __len__(self) -> int:
        return len(self.operations)

    def __iter__(self) -> Iterator[SpaceOperation]:
        return iter(self.operations)

    def __getitem__(self, index: int) -> SpaceOperation:
        return self.operations[index]

    def index_of(self, operation: SpaceOperation) -> int | None:
        return self._index.get(_key(operation))

    def inverse_index(self, index: int) -> int:
        return int(np.flatnonzero(self.table[index] == 0)[0])

    def rep_matrix(self, signature: IrrepsSignature, index: int) -> np.ndarray:
        """Cached block-diagonal action of element ``index`` on ``signature``."""
        key = (signature, index)
        if key not in self._rep_cache:
            self._rep_cache[key] = rep_matrix(signature, self.operations[index].point)
        return self._rep_cache[key]

    def point_part(self) -> "CandidateGroup":
        """Elements with zero translation (a subgroup when the lattice is fixed)."""
        zero = [op for op in self.operations if not any(op.translation)]
        return CandidateGroup(zero, lattice=self.lattice, name=f"{self.name} (point part)")


def signed_permutation_matrices() -> list[np.ndarray]:
    """All 48 signed permutation matrices (the full cubic group)."""
    matrices = []
    for perm in ((0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)):
        for signs in product((1.0, -1.0), repeat=3):
            matrix = np.zeros((3, 3))
            for row, (column, sign) in enumerate(zip(perm, signs, strict=True)):
                matrix[row, column] = sign
            matrices.append(matrix)
    return matrices


def cubic_group(include_inversion: bool = True) -> CandidateGroup:
    """The 48 cubic elements (24 without improper ones), identity first."""
    quarter_turn = np.array([[0, -1, 0], [1, 0, 0], [0, 0, 1]])
    three_fold = np.array([[0, 0, 1], [1, 0, 0], [0, 1, 0]])
    generators = [
        SpaceOperation(point=GroupElement.from_matrix(quarter_turn)),
        SpaceOperation(point=GroupElement.from_matrix(three_fold)),
    ]
    if include_inversion:
        generators.append(SpaceOperation(point=GroupElement(inversion=True)))
    name = "cubic" if include_inversion else "cubic-proper"
    return CandidateGroup.generate(generators, name=name)


def cubic_supercell_group(lattice: np.ndarray) -> CandidateGroup:
    """Cubic point operations composed with the 8 half-cell translations (384 elements)."""
    operations = []
    translations = list(product((0.0, 0.5), repeat=3))
    for point_op in cubic_group():
        for translation in translations:
            operations.append(SpaceOperation(point=point_op.point, translation=translation))
    return CandidateGroup(operations, lattice=lattice, name="cubic-supercell")
