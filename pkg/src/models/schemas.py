from enum import Enum

from pydantic import BaseModel, Field, field_validator

CHECKPOINT_FORMAT = "order-params-checkpoint"
RESULTS_SCHEMA_VERSION = 1


class RunStatus(str, Enum):
    """Outcome of one pipeline invocation."""

    COMPLETE = "complete"
    DIVERGED = "diverged"
    CHECKS_FAILED = "checks_failed"


class ParameterEntry(BaseModel):
    """Placement of one named parameter block in the flat weight vector."""

    name: str
    shape: list[int]
    offset: int = Field(ge=0)


class CheckpointFile(BaseModel):
    """On-disk model checkpoint.

    Attributes:
        format: Fixed tag identifying the file type.
        version: Layout version of this schema.
        input_signature: Per-site input irreps, e.g. ``"1x0e + 1x1o"``.
        hidden_signature: Gated hidden irreps.
        output_signature: Output ladder irreps.
        model: Network hyperparameters.
        seeds: Named sub-seeds the weights were drawn with.
        layout: Parameter blocks in flat order.
        weights: Flat weight vector.
    """

    format: str
    version: int = 1
    input_signature: str
    hidden_signature: str
    output_signature: str
    model: dict[str, int | float]
    seeds: dict[str, int] = Field(default_factory=dict)
    layout: list[ParameterEntry]
    weights: list[float]

    @field_validator("format")
    @classmethod
    def check_format(cls, v: str) -> str:
        if v != CHECKPOINT_FORMAT:
            raise ValueError(f"not a checkpoint file (format {v!r})")
        return v


class CheckResult(BaseModel):
    """One executed symmetry property.

    Attributes:
        name: Property checked.
        passed: Whether ``value`` stayed within ``tolerance``.
        value: Worst error (or violation count) observed.
        tolerance: Acceptance bound.
        detail: Human-readable summary.
    """

    name: str
    passed: bool
    value: float
    tolerance: float
    detail: str = ""


class CheckReportFile(BaseModel):
    """Contents of ``check_report.json``."""

    schema_version: int = RESULTS_SCHEMA_VERSION
    scenario: str
    seeds: dict[str, int]
    status: RunStatus
    checks: list[CheckResult]


class StabilizerSummary(BaseModel):
    """Stabilizer as stored in result files: group, size and member indices."""

    group: str
    group_size: int
    tolerance: float
    indices: list[int]


class ResultsFile(BaseModel):
    """Contents of ``results.json``.

    Attributes:
        schema_version: Layout version of this schema.
        scenario: Scenario id.
        mode: ``train`` or ``discover``.
        status: Run outcome.
        seeds: Named sub-seeds of the run.
        final_mse: Data term after the last step.
        history: Loss history (see TrainingHistory).
        order_parameters: Optimized slot rows (empty for ``train``).
        recovered: Order parameter per slot site.
        recovered_sites: Structure index of each ``recovered`` row.
        peaks: Peak vectors of every site's output signal.
        stabilizer_before: Sym of the input with zero slots.
        stabilizer_after: Sym of the input with recovered slots.
        lost_elements: Elements of Sym(input) missing from Sym(target).
        snapshots: Start, middle and end of discovery.
        tilt_match: Pattern comparison for perovskite discovery runs.
    """

    schema_version: int = RESULTS_SCHEMA_VERSION
    scenario: str
    mode: str
    status: RunStatus
    seeds: dict[str, int]
    final_mse: float | None = None
    history: dict
    order_parameters: list[list[float]] = Field(default_factory=list)
    recovered: list[list[float]] = Field(default_factory=list)
    recovered_sites: list[int] = Field(default_factory=list)
    peaks: list[list[list[float]]] = Field(default_factory=list)
    stabilizer_before: StabilizerSummary | None = None
    stabilizer_after: StabilizerSummary | None = None
    lost_elements: list[int] = Field(default_factory=list)
    snapshots: list[dict] = Field(default_factory=list)
    tilt_match: dict | None = None


class ManifestEntry(BaseModel):
    """One emitted file, relative to the output directory."""

    path: str
    sha256: str
    size: int = Field(ge=0)


class Manifest(BaseModel):
    """Contents of ``manifest.json``."""

    schema_version: int = RESULTS_SCHEMA_VERSION
    status: RunStatus
    files: list[ManifestEntry]
