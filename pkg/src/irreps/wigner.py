"""Coupling coefficients and rotation matrices in the real basis.

- wigner_3j: invariant coupling tensor of three degrees, built from the exact
  Racah formula (rational arithmetic) and conjugated into the real basis.
- wigner_D: real orthogonal matrices with ``Y_L(R x) = D^L(R) Y_L(x)``,
  obtained by projecting rotated harmonics onto a quadrature that is exact
  for degree-2L polynomials.
- rep_matrix / rep_apply: block-diagonal action of an O(3) element on a
  direct sum of irreps, parity included.
"""

import logging
import math
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy.spatial.transform import Rotation

from src.irreps.basis import MAX_DEGREE, real_from_complex, real_spherical_harmonics
from src.irreps.irrep import (
    GeometricTensor,
    GroupElement,
    IncompatibleDegreesError,
    IrrepsError,
    IrrepsSignature,
    Parity,
    SignatureMismatchError,
)

logger = logging.getLogger(__name__)

# Entries within this relative distance of the largest one count as tied
# when choosing the entry that fixes the global sign.
_SIGN_TIE = 1e-9


def _check_degree(degree: int) -> None:
    if not 0 <= degree <= MAX_DEGREE:
        raise IrrepsError(f"Degree {degree} outside 0..{MAX_DEGREE}")


def satisfies_triangle(l1: int, l2: int, l3: int) -> bool:
    return abs(l1 - l2) <= l3 <= l1 + l2


def _complex_3j_entry(l1: int, l2: int, l3: int, m1: int, m2: int, m3: int) -> float:
    """Racah formula for one Wigner 3j symbol, evaluated exactly then rounded."""
    if m1 + m2 + m3 != 0 or abs(m1) > l1 or abs(m2) > l2 or abs(m3) > l3:
        return 0.0
    f = math.factorial
    triangle = Fraction(
        f(l1 + l2 - l3) * f(l1 - l2 + l3) * f(-l1 + l2 + l3), f(l1 + l2 + l3 + 1)
    )
    squared_prefactor = triangle * (
        f(l1 + m1) * f(l1 - m1) * f(l2 + m2) * f(l2 - m2) * f(l3 + m3) * f(l3 - m3)
    )

    k_min = max(0, l2 - l3 - m1, l1 - l3 + m2)
    k_max = min(l1 + l2 - l3, l1 - m1, l2 + m2)
    total = Fraction(0)
    for k in range(k_min, k_max + 1):
        denominator = (
            f(k)
            * f(l3 - l2 + k + m1)
            * f(l3 - l1 + k - m2)
            * f(l1 + l2 - l3 - k)
            * f(l1 - k - m1)
            * f(l2 - k + m2)
        )
        total += Fraction((-1) ** k, denominator)
    if total == 0:
        return 0.0

    phase = (-1) ** (l1 - l2 - m3)
    magnitude = math.sqrt(float(squared_prefactor * total * total))
    return phase * math.copysign(magnitude, float(total))


def _complex_3j(l1: int, l2: int, l3: int) -> np.ndarray:
    table = np.zeros((2 * l1 + 1, 2 * l2 + 1, 2 * l3 + 1))
    for m1 in range(-l1, l1 + 1):
        for m2 in range(-l2, l2 + 1):
            m3 = -m1 - m2
            if abs(m3) <= l3:
                table[m1 + l1, m2 + l2, m3 + l3] = _complex_3j_entry(l1, l2, l3, m1, m2, m3)
    return table


@lru_cache(maxsize=None)
def wigner_3j(l1: int, l2: int, l3: int) -> np.ndarray:
    """Real-basis invariant coupling tensor of shape (2l1+1, 2l2+1, 2l3+1).

    Normalized to unit Frobenius norm. The global sign makes the first
    (row-major) entry of largest magnitude positive.

    Raises:
        IncompatibleDegreesError: If the degrees violate the triangle rule.
    """
    for degree in (l1, l2, l3):
        _check_degree(degree)
    if not satisfies_triangle(l1, l2, l3):
        raise IncompatibleDegreesError(f"incompatible degrees ({l1}, {l2}, {l3})")

    # Coordinates in the real basis transform with conj(Q).
    q1, q2, q3 = (real_from_complex(degree).conj() for degree in (l1, l2, l3))
    tensor = np.einsum("ai,bj,ck,ijk->abc", q1, q2, q3, _complex_3j(l1, l2, l3))

    flat = tensor.reshape(-1)
    magnitudes = np.abs(flat)
    pivot = int(np.flatnonzero(magnitudes >= magnitudes.max() * (1 - _SIGN_TIE))[0])
    tensor = (tensor * (abs(flat[pivot]) / flat[pivot])).real
    tensor = tensor / np.linalg.norm(tensor)
    tensor.setflags(write=False)
    return tensor


@lru_cache(maxsize=None)
def _projection_quadrature(degree: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Nodes, weights and harmonics of a sphere rule exact for degree 2L."""
    z, z_weights = np.polynomial.legendre.leggauss(degree + 2)
    n_phi = 2 * degree + 3
    phi = 2 * np.pi * np.arange(n_phi) / n_phi
    zz, pp = np.meshgrid(z, phi, indexing="ij")
    ring = np.sqrt(1.0 - zz**2)
    points = np.stack([ring * np.cos(pp), ring * np.sin(pp), zz], axis=-1).reshape(-1, 3)
    weights = (z_weights[:, None] * np.full(n_phi, 2 * np.pi / n_phi)[None, :]).reshape(-1)
    harmonics = real_spherical_harmonics(degree, points)[degree]
    return points, weights, harmonics


def wigner_D(degree: int, g: GroupElement) -> np.ndarray:
    """Real orthogonal (2L+1)x(2L+1) matrix of the rotation part of ``g``.

    Parity is not applied here; see :func:`rep_matrix`.
    """
    _check_degree(degree)
    if degree == 0:
        return np.ones((1, 1))
    if not any(g.rotation):
        return np.eye(2 * degree + 1)
    points, weights, harmonics = _projection_quadrature(degree)
    rotated = real_spherical_harmonics(degree, points @ g.rotation_matrix.T)[degree]
    return (2 * degree + 1) / (4 * np.pi) * np.einsum("p,pa,pb->ab", weights, rotated, harmonics)


def rep_matrix(signature: IrrepsSignature, g: GroupElement) -> np.ndarray:
    """Block-diagonal matrix of ``g`` acting on ``signature``, parity included."""
    matrix = np.zeros((signature.dim, signature.dim))
    cache: dict[int, np.ndarray] = {}
    for block_slice, entry in zip(signature.slices(), signature.entries, strict=True):
        degree = entry.irrep.degree
        if degree not in cache:
            cache[degree] = wigner_D(degree, g)
        d = cache[degree]
        if g.inversion and entry.irrep.parity is Parity.ODD:
            d = -d
        matrix[block_slice, block_slice] = np.kron(np.eye(entry.mul), d)
    return matrix


def rep_apply_array(signature: IrrepsSignature, g: GroupElement, values: np.ndarray) -> np.ndarray:
    """Apply ``g`` to an array whose last axis follows ``signature``."""
    values = np.asarray(values, dtype=np.float64)
    if values.shape[-1] != signature.dim:
        raise SignatureMismatchError(
            f"Last axis {values.shape[-1]} does not match signature dimension {signature.dim}"
        )
    return values @ rep_matrix(signature, g).T


def rep_apply(
    signature: IrrepsSignature, g: GroupElement, tensor: GeometricTensor
) -> GeometricTensor:
    """Transform ``tensor`` by ``g``.

    Raises:
        SignatureMismatchError: If ``tensor`` does not carry ``signature``.
    """
    if tensor.signature != signature:
        raise SignatureMismatchError(
            f"Tensor signature {tensor.signature} differs from {signature}"
        )
    return GeometricTensor(
        signature=signature,
        coefficients=rep_matrix(signature, g) @ tensor.coefficients,
    )


def random_group_element(rng: np.random.Generator, include_inversion: bool) -> GroupElement:
    """Haar-uniform rotation, with a fair inversion flag when enabled."""
    rotvec = Rotation.random(random_state=rng).as_rotvec()
    inversion = bool(rng.random() < 0.5) if include_inversion else False
    return GroupElement(rotation=tuple(float(v) for v in rotvec), inversion=inversion)
