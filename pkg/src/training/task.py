"""Learning tasks: a structure, its input template and per-site targets.

Input features are the species one-hot scalars followed by the
order-parameter slot. Slot values come from one leaf array whose rows are
shared across sites according to the sharing rule:

- global: one row, replicated to every slot site
- per_site: one row per slot site
- custom: one row per tie group, ``tie_groups[k]`` naming the row of the
  k-th slot site; an optional ``component_mask`` zeroes chosen components
"""

from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.autodiff import Node, ops
from src.irreps import GeometricTensor, Irrep, IrrepsSignature, MulIrrep, Parity
from src.models.structure import Structure


class Sharing(str, Enum):
    """How order-parameter slot values are tied across sites."""

    GLOBAL = "global"
    PER_SITE = "per_site"
    CUSTOM = "custom"


class Task(BaseModel):
    """A structure with its target signals and order-parameter template.

    Attributes:
        name: Label used in logs and result files.
        structure: Geometry; ``structure.order_parameter_sites`` carry slots.
        species_kinds: Species channels of the one-hot input scalars.
        slot_signature: Irreps of the order-parameter slot (may be empty).
        sharing: Tie rule for slot values.
        tie_groups: Row index per slot site (custom sharing only).
        component_mask: 0/1 per slot component; zeros are held at zero.
        targets: (N, output dim) target coefficients.
        target_signature: Layout of the targets.
        lambda_sparsity: Weight of the L1 penalty on L > 0 slot components.
        lambda_degree: Weight of the degree penalty.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    name: str
    structure: Structure
    species_kinds: tuple[str, ...]
    slot_signature: IrrepsSignature = IrrepsSignature()
    sharing: Sharing = Sharing.GLOBAL
    tie_groups: tuple[int, ...] | None = None
    component_mask: np.ndarray | None = None
    targets: np.ndarray
    target_signature: IrrepsSignature
    lambda_sparsity: float = Field(default=1e-2, ge=0)
    lambda_degree: float = Field(default=0.0, ge=0)

    @field_validator("targets", mode="before")
    @classmethod
    def to_target_array(cls, v: object) -> np.ndarray:
        return np.array(v, dtype=np.float64)

    @field_validator("component_mask", mode="before")
    @classmethod
    def to_mask(cls, v: object) -> np.ndarray | None:
        if v is None:
            return None
        return np.array(v, dtype=np.float64).reshape(-1)

    @model_validator(mode="after")
    def check_layout(self) -> "Task":
        n_sites = self.structure.n_sites
        if self.targets.shape != (n_sites, self.target_signature.dim):
            raise ValueError(
                f"targets of shape {self.targets.shape} for {n_sites} sites "
                f"and signature {self.target_signature}"
            )
        if missing := set(self.structure.species) - set(self.species_kinds):
            raise ValueError(f"species {sorted(missing)} have no input channel")
        sites = self.structure.order_parameter_sites
        if self.slot_signature.dim and not sites:
            raise ValueError("an order-parameter slot needs at least one site")
        if self.sharing is Sharing.CUSTOM:
            if self.tie_groups is None or len(self.tie_groups) != len(sites):
                raise ValueError("custom sharing needs one tie group per order-parameter site")
            if sorted(set(self.tie_groups)) != list(range(len(set(self.tie_groups)))):
                raise ValueError("tie groups must be numbered 0..G-1")
        elif self.tie_groups is not None:
            raise ValueError("tie_groups only apply to custom sharing")
        if self.component_mask is not None:
            if self.component_mask.shape[0] != self.slot_signature.dim:
                raise ValueError("component_mask must have one entry per slot component")
            if not np.all(np.isin(self.component_mask, (0.0, 1.0))):
                raise ValueError("component_mask entries must be 0 or 1")
        return self

    @property
    def species_signature(self) -> IrrepsSignature:
        scalar = Irrep(degree=0, parity=Parity.EVEN)
        return IrrepsSignature(entries=(MulIrrep(mul=len(self.species_kinds), irrep=scalar),))

    @property
    def input_signature(self) -> IrrepsSignature:
        return self.species_signature + self.slot_signature

    @property
    def slot_sites(self) -> tuple[int, ...]:
        return self.structure.order_parameter_sites

    @property
    def row_of_site(self) -> np.ndarray:
        """Leaf row feeding each slot site."""
        n = len(self.slot_sites)
        if self.sharing is Sharing.GLOBAL:
            return np.zeros(n, dtype=int)
        if self.sharing is Sharing.PER_SITE:
            return np.arange(n)
        return np.asarray(self.tie_groups, dtype=int)

    @property
    def order_parameter_shape(self) -> tuple[int, int]:
        rows = int(self.row_of_site.max()) + 1 if len(self.slot_sites) else 0
        return rows, self.slot_signature.dim

    def initial_order_parameters(self) -> np.ndarray:
        """Slots start at zero."""
        return np.zeros(self.order_parameter_shape)

    def species_features(self) -> np.ndarray:
        return self.structure.species_one_hot(list(self.species_kinds))

    def expand(self, order_parameters: Node) -> Node:
        """Leaf rows -> (N, input dim) features node."""
        species = ops.lift(self.species_features())
        if not self.slot_signature.dim:
            return species
        rows = order_parameters
        if self.component_mask is not None:
            rows = ops.multiply(rows, self.component_mask[None, :])
        per_site = ops.gather(rows, self.row_of_site)
        slots = ops.scatter_sum(per_site, np.asarray(self.slot_sites), self.structure.n_sites)
        return ops.concat([species, slots], axis=-1)

    def input_features(self, order_parameters: np.ndarray | None = None) -> np.ndarray:
        """Numeric input features; zero slots when ``order_parameters`` is None."""
        values = self.initial_order_parameters() if order_parameters is None else order_parameters
        return self.expand(ops.lift(np.asarray(values, dtype=np.float64))).value

    def site_tensors(self, order_parameters: np.ndarray) -> list[GeometricTensor]:
        """Order parameter seen by every slot site."""
        features = self.input_features(order_parameters)
        offset = self.species_signature.dim
        return [
            GeometricTensor(signature=self.slot_signature, coefficients=features[site, offset:])
            for site in self.slot_sites
        ]

    def target_tensors(self) -> list[GeometricTensor]:
        return [
            GeometricTensor(signature=self.target_signature, coefficients=row)
            for row in self.targets
        ]
