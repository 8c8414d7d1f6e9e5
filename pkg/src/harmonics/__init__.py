"""Sphere signals built from real spherical harmonics.

Responsibilities:
    - eval_sh: harmonics ladder at a unit direction
    - project_points: distance-weighted projection of a point cloud, rescaled
      so the signal maximum equals the largest distance
    - sample_signal / SphereGrid: exact-quadrature equal-angle sampling and
      CSV export of (theta, phi, value) rows
    - peak_vectors: maxima of a signal read back as displacement vectors
"""

from src.harmonics.sphere import (
    DEFAULT_GRID_RES,
    HarmonicsError,
    NonUnitDirectionError,
    SignalSamples,
    SphereGrid,
    default_grid,
    eval_sh,
    ladder,
    ladder_lmax,
    peak_vectors,
    project_points,
    sample_signal,
    sh_array,
    signal_maximum,
)

__all__ = [
    "DEFAULT_GRID_RES",
    "HarmonicsError",
    "NonUnitDirectionError",
    "SignalSamples",
    "SphereGrid",
    "default_grid",
    "eval_sh",
    "ladder",
    "ladder_lmax",
    "peak_vectors",
    "project_points",
    "sample_signal",
    "sh_array",
    "signal_maximum",
]
