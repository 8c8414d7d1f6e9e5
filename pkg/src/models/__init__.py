"""Shared data models.

Models:
    - Structure: point cloud with species and optional periodic lattice
    - CheckpointFile / ParameterEntry: on-disk model checkpoint
    - ResultsFile / CheckReportFile / CheckResult: run outputs
    - Manifest / ManifestEntry: emitted files with content hashes
    - RunStatus: outcome of one invocation
"""

from src.models.schemas import (
    CHECKPOINT_FORMAT,
    RESULTS_SCHEMA_VERSION,
    CheckpointFile,
    CheckReportFile,
    CheckResult,
    Manifest,
    ManifestEntry,
    ParameterEntry,
    ResultsFile,
    RunStatus,
    StabilizerSummary,
)
from src.models.structure import Structure

__all__ = [
    "CHECKPOINT_FORMAT",
    "RESULTS_SCHEMA_VERSION",
    "CheckResult",
    "CheckReportFile",
    "CheckpointFile",
    "Manifest",
    "ManifestEntry",
    "ParameterEntry",
    "ResultsFile",
    "RunStatus",
    "StabilizerSummary",
    "Structure",
]
