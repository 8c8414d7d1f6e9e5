"""Point configurations shared by the network, symmetry and scenario code.

A Structure is a finite or periodic point cloud with species labels. When a
lattice is present (rows are lattice vectors) positions are wrapped into the
cell on construction.
"""

import json
from pathlib import Path

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

# Fractional coordinates this close below 1 wrap to 0.
_WRAP_TOLERANCE = 1e-9


class Structure(BaseModel):
    """Positions, species and optional periodic lattice.

    Attributes:
        positions: (N, 3) Cartesian coordinates.
        species: One label per point.
        lattice: (3, 3) lattice vectors as rows, or None for a finite cloud.
        order_parameter_sites: Indices of the sites that carry order-parameter slots.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    positions: np.ndarray
    species: tuple[str, ...]
    lattice: np.ndarray | None = None
    order_parameter_sites: tuple[int, ...] = Field(default=())

    @field_validator("positions", mode="before")
    @classmethod
    def to_point_array(cls, v: object) -> np.ndarray:
        array = np.array(v, dtype=np.float64).reshape(-1, 3)
        if not np.all(np.isfinite(array)):
            raise ValueError("positions must be finite")
        return array

    @field_validator("lattice", mode="before")
    @classmethod
    def to_lattice(cls, v: object) -> np.ndarray | None:
        if v is None:
            return None
        lattice = np.array(v, dtype=np.float64).reshape(3, 3)
        if abs(np.linalg.det(lattice)) < 1e-12:
            raise ValueError("lattice is singular")
        return lattice

    @model_validator(mode="after")
    def check_consistency(self) -> "Structure":
        if len(self.species) != len(self.positions):
            raise ValueError(
                f"{len(self.species)} species labels for {len(self.positions)} positions"
            )
        for site in self.order_parameter_sites:
            if not 0 <= site < len(self.positions):
                raise ValueError(f"order-parameter site {site} out of range")
        if self.lattice is not None:
            fractional = self.positions @ np.linalg.inv(self.lattice)
            fractional = fractional - np.floor(fractional + _WRAP_TOLERANCE)
            object.__setattr__(self, "positions", fractional @ self.lattice)
        self.positions.setflags(write=False)
        return self

    @property
    def n_sites(self) -> int:
        return len(self.positions)

    @property
    def is_periodic(self) -> bool:
        return self.lattice is not None

    def kinds(self) -> list[str]:
        """Distinct species in order of first appearance."""
        return list(dict.fromkeys(self.species))

    def species_one_hot(self, kinds: list[str] | None = None) -> np.ndarray:
        """(N, len(kinds)) indicator matrix of species membership."""
        kinds = kinds or self.kinds()
        one_hot = np.zeros((self.n_sites, len(kinds)))
        for i, label in enumerate(self.species):
            one_hot[i, kinds.index(label)] = 1.0
        return one_hot

    def transformed(self, matrix: np.ndarray) -> "Structure":
        """Apply an orthogonal 3x3 map to positions (and lattice vectors)."""
        matrix = np.asarray(matrix, dtype=np.float64)
        return Structure(
            positions=self.positions @ matrix.T,
            species=self.species,
            lattice=None if self.lattice is None else self.lattice @ matrix.T,
            order_parameter_sites=self.order_parameter_sites,
        )

    def permuted(self, order: np.ndarray) -> "Structure":
        """Reorder points; order-parameter site indices follow their points."""
        order = np.asarray(order, dtype=int)
        inverse = np.argsort(order)
        return Structure(
            positions=self.positions[order],
            species=tuple(self.species[i] for i in order),
            lattice=self.lattice,
            order_parameter_sites=tuple(
                sorted(int(inverse[s]) for s in self.order_parameter_sites)
            ),
        )

    def to_dict(self) -> dict:
        return {
            "positions": self.positions.tolist(),
            "species": list(self.species),
            "lattice": None if self.lattice is None else self.lattice.tolist(),
            "order_parameter_sites": list(self.order_parameter_sites),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Structure":
        return cls(
            positions=data["positions"],
            species=tuple(data["species"]),
            lattice=data.get("lattice"),
            order_parameter_sites=tuple(data.get("order_parameter_sites", ())),
        )

    def to_json(self, path: Path) -> None:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(self.to_dict(), indent=2))

    def to_xyz(self, comment: str = "") -> str:
        """Extended XYZ block (lattice and column layout in the comment line)."""
        header = ['Properties=species:S:1:pos:R:3']
        if self.lattice is not None:
            flat = " ".join(f"{v:.10f}" for v in self.lattice.reshape(-1))
            header.insert(0, f'Lattice="{flat}" pbc="T T T"')
        if comment:
            header.append(f'comment="{comment}"')
        lines = [str(self.n_sites), " ".join(header)]
        for label, (x, y, z) in zip(self.species, self.positions, strict=True):
            lines.append(f"{label} {x:.10f} {y:.10f} {z:.10f}")
        return "\n".join(lines) + "\n"
