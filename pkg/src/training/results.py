"""Training histories, discovery results and the component magnitude table."""

from pathlib import Path

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field

from src.irreps import GeometricTensor
from src.symmetry import StabilizerReport

MAGNITUDE_COLUMNS = ["site", "L", "parity", "m", "value"]


class TrainingHistory(BaseModel):
    """Loss per executed step.

    Attributes:
        model_phase: Total loss recorded at every weight update.
        input_phase: Total loss recorded at every order-parameter update.
        mse: Data term at every step, both phases in execution order.
        plateau_step: Model step at which the plateau rule fired, if it did.
        blocks: Number of completed alternation blocks.
    """

    model_phase: list[float] = Field(default_factory=list)
    input_phase: list[float] = Field(default_factory=list)
    mse: list[float] = Field(default_factory=list)
    plateau_step: int | None = None
    blocks: int = 0

    @property
    def n_steps(self) -> int:
        return len(self.model_phase) + len(self.input_phase)

    @property
    def final_mse(self) -> float | None:
        return self.mse[-1] if self.mse else None


class MagnitudeRow(BaseModel):
    """One order-parameter component of one site."""

    site: int
    L: int
    parity: str
    m: int
    value: float


class Snapshot(BaseModel):
    """Order parameters and the first site's output at one moment of discovery."""

    label: str
    step: int
    order_parameters: list[list[float]]
    site0_output: list[float]


class DiscoveryResult(BaseModel):
    """Everything a discovery run produces.

    Attributes:
        order_parameters: Leaf rows as optimized, shape (rows, slot dim).
        recovered: Order parameter at every slot site.
        recovered_sites: Structure index of every entry of ``recovered``.
        history: Loss history of both phases.
        magnitudes: Component table, one row per (slot site, component).
        stabilizer_before: Sym of the input configuration with zero slots.
        stabilizer_after: Sym of the input configuration with recovered slots.
        snapshots: Start, middle and end of the optimization.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True)

    order_parameters: np.ndarray
    recovered: list[GeometricTensor]
    recovered_sites: list[int]
    history: TrainingHistory
    magnitudes: list[MagnitudeRow]
    stabilizer_before: StabilizerReport | None = None
    stabilizer_after: StabilizerReport | None = None
    snapshots: list[Snapshot] = Field(default_factory=list)

    @property
    def final_mse(self) -> float | None:
        return self.history.final_mse

    @property
    def nonscalar_magnitude(self) -> float:
        """Sum of |value| over L > 0 components of every slot site."""
        return float(sum(abs(row.value) for row in self.magnitudes if row.L > 0))

    def magnitude_frame(self) -> pd.DataFrame:
        return magnitude_frame(self.magnitudes)


def magnitude_table(
    tensors: list[GeometricTensor], sites: list[int]
) -> list[MagnitudeRow]:
    """Signed value of every component, labelled by site, degree, parity and m."""
    rows: list[MagnitudeRow] = []
    for site, tensor in zip(sites, tensors, strict=True):
        signature = tensor.signature
        for index, value in enumerate(tensor.coefficients):
            entry, _, m = signature.component_label(index)
            irrep = signature.entries[entry].irrep
            rows.append(
                MagnitudeRow(
                    site=site, L=irrep.degree, parity=irrep.parity.symbol, m=m, value=float(value)
                )
            )
    return rows


def magnitude_frame(rows: list[MagnitudeRow]) -> pd.DataFrame:
    return pd.DataFrame([row.model_dump() for row in rows], columns=MAGNITUDE_COLUMNS)


def write_magnitudes(rows: list[MagnitudeRow], path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    magnitude_frame(rows).to_csv(path, index=False, float_format="%.12g")
    return path


def component_share(
    rows: list[MagnitudeRow], components: set[tuple[int, str, int]]
) -> float:
    """Fraction of the L > 0 magnitude carried by the (L, parity, m) ``components``."""
    total = sum(abs(row.value) for row in rows if row.L > 0)
    if total == 0:
        return 0.0
    inside = sum(
        abs(row.value) for row in rows if row.L > 0 and (row.L, row.parity, row.m) in components
    )
    return inside / total


def dominant_component(rows: list[MagnitudeRow]) -> tuple[tuple[int, str, int], float]:
    """(L, parity, m) with the largest summed |value| over sites, and that sum."""
    totals = component_totals(rows)
    if not totals:
        raise ValueError("no L > 0 components")
    key = max(totals, key=lambda k: totals[k])
    return key, totals[key]


def component_totals(rows: list[MagnitudeRow]) -> dict[tuple[int, str, int], float]:
    """Summed |value| over sites per L > 0 (L, parity, m)."""
    totals: dict[tuple[int, str, int], float] = {}
    for row in rows:
        if row.L > 0:
            key = (row.L, row.parity, row.m)
            totals[key] = totals.get(key, 0.0) + abs(row.value)
    return totals


def block_magnitudes(tensor: GeometricTensor) -> dict[str, float]:
    """Euclidean norm of every entry, keyed by its irrep label."""
    return {
        str(entry.irrep): float(np.linalg.norm(tensor.block(i)))
        for i, entry in enumerate(tensor.signature.entries)
    }
