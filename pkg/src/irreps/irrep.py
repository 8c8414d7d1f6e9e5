"""Irreducible representations of O(3) and the values that carry them.

Basis convention: the 2L+1 components of a degree-L block are ordered
m = -L..L, negative m being the sine-type harmonics and positive m the
cosine-type ones. For L=1 this is the (y, z, x) ordering, so the m=0
component always points along z.
"""

from __future__ import annotations

import re
from collections.abc import Iterator
from enum import IntEnum
from functools import cached_property

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from scipy.spatial.transform import Rotation


class IrrepsError(Exception):
    """Base error for representation algebra."""


class IncompatibleDegreesError(IrrepsError):
    """Raised when three degrees violate the triangle rule."""


class SignatureMismatchError(IrrepsError):
    """Raised when a tensor does not carry the expected signature."""


class Parity(IntEnum):
    """Behavior under inversion."""

    EVEN = 1
    ODD = -1

    @property
    def symbol(self) -> str:
        return "e" if self is Parity.EVEN else "o"


class Irrep(BaseModel):
    """Irrep of O(3): degree L and parity.

    Attributes:
        degree: Non-negative degree L; the block dimension is 2L+1.
        parity: Even or odd under inversion, independent of L.
    """

    model_config = ConfigDict(frozen=True)

    degree: int = Field(ge=0)
    parity: Parity

    @classmethod
    def parse(cls, text: str) -> Irrep:
        """Parse ``"1e"``, ``"2o"`` or ``"3y"`` (natural parity)."""
        match = re.fullmatch(r"\s*(\d+)([eoy])\s*", text)
        if match is None:
            raise IrrepsError(f'Unable to parse irrep "{text}"')
        degree = int(match.group(1))
        symbol = match.group(2)
        if symbol == "y":
            return cls.natural(degree)
        return cls(degree=degree, parity=Parity.EVEN if symbol == "e" else Parity.ODD)

    @classmethod
    def natural(cls, degree: int) -> Irrep:
        """Irrep with the parity of the degree-L spherical harmonics."""
        return cls(degree=degree, parity=Parity.EVEN if degree % 2 == 0 else Parity.ODD)

    @property
    def dim(self) -> int:
        return 2 * self.degree + 1

    @property
    def is_scalar(self) -> bool:
        return self.degree == 0

    def __str__(self) -> str:
        return f"{self.degree}{self.parity.symbol}"


class MulIrrep(BaseModel):
    """A multiplicity of copies of one irrep."""

    model_config = ConfigDict(frozen=True)

    mul: int = Field(gt=0)
    irrep: Irrep

    @property
    def dim(self) -> int:
        return self.mul * self.irrep.dim

    def __str__(self) -> str:
        return f"{self.mul}x{self.irrep}"


class IrrepsSignature(BaseModel):
    """Ordered direct sum of irreps describing a flat coefficient vector.

    Components are laid out entry by entry; inside an entry, copy by copy;
    inside a copy, m = -L..L.
    """

    model_config = ConfigDict(frozen=True)

    entries: tuple[MulIrrep, ...] = ()

    @classmethod
    def parse(cls, text: str) -> IrrepsSignature:
        """Parse ``"4x0e + 1x1o + 2e"``; an empty string is the empty signature."""
        entries: list[MulIrrep] = []
        for chunk in text.split("+"):
            chunk = chunk.strip()
            if not chunk:
                continue
            mul_text, _, irrep_text = chunk.rpartition("x")
            mul = int(mul_text) if mul_text else 1
            entries.append(MulIrrep(mul=mul, irrep=Irrep.parse(irrep_text)))
        return cls(entries=tuple(entries))

    @classmethod
    def from_irreps(cls, irreps: list[Irrep], mul: int = 1) -> IrrepsSignature:
        return cls(entries=tuple(MulIrrep(mul=mul, irrep=ir) for ir in irreps))

    @classmethod
    def natural_ladder(cls, lmax: int) -> IrrepsSignature:
        """``0e + 1o + 2e + ...`` up to ``lmax``, multiplicity 1."""
        return cls.from_irreps([Irrep.natural(degree) for degree in range(lmax + 1)])

    @classmethod
    def all_parities(cls, lmin: int, lmax: int, mul: int = 1) -> IrrepsSignature:
        """Every (L, parity) for lmin <= L <= lmax, even before odd."""
        irreps = [
            Irrep(degree=degree, parity=parity)
            for degree in range(lmin, lmax + 1)
            for parity in (Parity.EVEN, Parity.ODD)
        ]
        return cls.from_irreps(irreps, mul=mul)

    @cached_property
    def dim(self) -> int:
        return sum(entry.dim for entry in self.entries)

    @property
    def lmax(self) -> int:
        return max((entry.irrep.degree for entry in self.entries), default=0)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[MulIrrep]:  # type: ignore[override]
        return iter(self.entries)

    def __add__(self, other: IrrepsSignature) -> IrrepsSignature:
        return IrrepsSignature(entries=self.entries + other.entries)

    def __str__(self) -> str:
        return " + ".join(str(entry) for entry in self.entries)

    @cached_property
    def offsets(self) -> tuple[int, ...]:
        """Start offset of every entry in the flat layout."""
        starts = [0]
        for entry in self.entries:
            starts.append(starts[-1] + entry.dim)
        return tuple(starts[:-1])

    def slices(self) -> list[slice]:
        return [
            slice(start, start + entry.dim)
            for start, entry in zip(self.offsets, self.entries, strict=True)
        ]

    def component_index(self, entry: int, copy: int, m: int) -> int:
        """Flat index of component m of copy ``copy`` of entry ``entry``."""
        block = self.entries[entry]
        degree = block.irrep.degree
        if not 0 <= copy < block.mul or not -degree <= m <= degree:
            raise IrrepsError(f"No component ({entry}, {copy}, {m}) in {self}")
        return self.offsets[entry] + copy * block.irrep.dim + (m + degree)

    def component_label(self, index: int) -> tuple[int, int, int]:
        """Inverse of :meth:`component_index`."""
        if not 0 <= index < self.dim:
            raise IrrepsError(f"Component {index} out of range for {self}")
        for entry, (start, block) in enumerate(zip(self.offsets, self.entries, strict=True)):
            if index < start + block.dim:
                local = index - start
                copy, position = divmod(local, block.irrep.dim)
                return entry, copy, position - block.irrep.degree
        raise AssertionError("unreachable")

    def degrees_per_component(self) -> np.ndarray:
        """Degree L of every flat component."""
        return np.concatenate(
            [np.full(entry.dim, entry.irrep.degree, dtype=int) for entry in self.entries]
            or [np.zeros(0, dtype=int)]
        )


class GroupElement(BaseModel):
    """Element of O(3): a proper rotation, optionally followed by inversion.

    The rotation is stored as a rotation vector (axis times angle, radians).
    Composition goes through 3x3 matrices; inversion flags compose by XOR.
    """

    model_config = ConfigDict(frozen=True)

    rotation: tuple[float, float, float] = (0.0, 0.0, 0.0)
    inversion: bool = False

    @classmethod
    def identity(cls) -> GroupElement:
        return cls()

    @classmethod
    def from_matrix(cls, matrix: np.ndarray) -> GroupElement:
        """Build from any orthogonal 3x3 matrix (det -1 means inversion)."""
        matrix = np.asarray(matrix, dtype=np.float64)
        inversion = bool(np.linalg.det(matrix) < 0)
        proper = -matrix if inversion else matrix
        rotvec = Rotation.from_matrix(proper).as_rotvec()
        return cls(rotation=tuple(float(v) for v in rotvec), inversion=inversion)

    @cached_property
    def rotation_matrix(self) -> np.ndarray:
        """Proper rotation part as a 3x3 matrix."""
        return Rotation.from_rotvec(np.asarray(self.rotation)).as_matrix()

    @property
    def matrix(self) -> np.ndarray:
        """Full orthogonal action on Cartesian vectors."""
        return -self.rotation_matrix if self.inversion else self.rotation_matrix

    @property
    def is_identity(self) -> bool:
        return not self.inversion and not any(self.rotation)

    def compose(self, other: GroupElement) -> GroupElement:
        """``self ∘ other``: apply ``other`` first."""
        rotvec = Rotation.from_matrix(self.rotation_matrix @ other.rotation_matrix).as_rotvec()
        return GroupElement(
            rotation=tuple(float(v) for v in rotvec),
            inversion=self.inversion != other.inversion,
        )

    def inverse(self) -> GroupElement:
        return GroupElement(
            rotation=tuple(-float(v) for v in self.rotation),
            inversion=self.inversion,
        )


class GeometricTensor(BaseModel):
    """Coefficients of a direct sum of irreps.

    Attributes:
        signature: Layout of the coefficients.
        coefficients: Real vector whose length equals ``signature.dim``.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    signature: IrrepsSignature
    coefficients: np.ndarray

    @field_validator("coefficients", mode="before")
    @classmethod
    def to_float_vector(cls, v: object) -> np.ndarray:
        array = np.array(v, dtype=np.float64).reshape(-1)
        array.setflags(write=False)
        return array

    @model_validator(mode="after")
    def check_length(self) -> GeometricTensor:
        if self.coefficients.shape[0] != self.signature.dim:
            raise SignatureMismatchError(
                f"{self.coefficients.shape[0]} coefficients for signature "
                f"{self.signature} of dimension {self.signature.dim}"
            )
        return self

    @classmethod
    def zeros(cls, signature: IrrepsSignature) -> GeometricTensor:
        return cls(signature=signature, coefficients=np.zeros(signature.dim))

    def block(self, entry: int) -> np.ndarray:
        """Coefficients of one entry as a (mul, 2L+1) array."""
        block = self.signature.entries[entry]
        values = self.coefficients[self.signature.slices()[entry]]
        return values.reshape(block.mul, block.irrep.dim)

    def norm(self) -> float:
        return float(np.linalg.norm(self.coefficients))

    def __add__(self, other: GeometricTensor) -> GeometricTensor:
        if other.signature != self.signature:
            raise SignatureMismatchError(f"Cannot add {other.signature} to {self.signature}")
        return GeometricTensor(
            signature=self.signature, coefficients=self.coefficients + other.coefficients
        )

    def __mul__(self, factor: float) -> GeometricTensor:
        return GeometricTensor(signature=self.signature, coefficients=self.coefficients * factor)

    __rmul__ = __mul__
