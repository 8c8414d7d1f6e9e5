"""Real spherical harmonics in the package basis.

Racah (Schmidt semi-) normalization: ``Y_L^0(z) = 1`` and
``sum_m Y_L^m(x)^2 = 1`` on the unit sphere. For m > 0 the component is
``sqrt(2 (L-m)!/(L+m)!) * d^m P_L/dz^m * Re((x + i y)^m)``, for m < 0 the
same with ``Im``; no Condon-Shortley phase.
"""

import math

import numpy as np

MAX_DEGREE = 12


def _legendre_derivatives(lmax: int, z: np.ndarray) -> list[list[np.ndarray]]:
    """``q[l][m] = d^m P_l / dz^m`` evaluated at ``z`` for 0 <= m <= l <= lmax."""
    q: list[list[np.ndarray]] = [[np.ones_like(z)]]
    for degree in range(1, lmax + 1):
        q.append([np.zeros_like(z) for _ in range(degree + 1)])
    for m in range(lmax + 1):
        # (2m-1)!! seeds the diagonal; the upward recurrence runs in l.
        q[m][m] = np.full_like(z, float(math.prod(range(2 * m - 1, 0, -2))))
        if m + 1 <= lmax:
            q[m + 1][m] = (2 * m + 1) * z * q[m][m]
        for degree in range(m + 2, lmax + 1):
            q[degree][m] = (
                (2 * degree - 1) * z * q[degree - 1][m] - (degree + m - 1) * q[degree - 2][m]
            ) / (degree - m)
    return q


def real_spherical_harmonics(lmax: int, xyz: np.ndarray) -> list[np.ndarray]:
    """Evaluate every degree up to ``lmax`` at unit vectors.

    Args:
        lmax: Largest degree, at most ``MAX_DEGREE``.
        xyz: Array of shape (..., 3); rows are assumed to be unit vectors.

    Returns:
        One array per degree L, shaped (..., 2L+1).
    """
    if not 0 <= lmax <= MAX_DEGREE:
        raise ValueError(f"Degree {lmax} outside 0..{MAX_DEGREE}")
    xyz = np.asarray(xyz, dtype=np.float64)
    x, y, z = xyz[..., 0], xyz[..., 1], xyz[..., 2]

    q = _legendre_derivatives(lmax, z)
    # Re/Im of (x + i y)^m by repeated complex multiplication.
    cos_m = [np.ones_like(x)]
    sin_m = [np.zeros_like(x)]
    for _ in range(lmax):
        c, s = cos_m[-1], sin_m[-1]
        cos_m.append(c * x - s * y)
        sin_m.append(c * y + s * x)

    harmonics = []
    for degree in range(lmax + 1):
        block = np.empty(xyz.shape[:-1] + (2 * degree + 1,))
        block[..., degree] = q[degree][0]
        for m in range(1, degree + 1):
            norm = math.sqrt(2.0 * math.factorial(degree - m) / math.factorial(degree + m))
            block[..., degree + m] = norm * q[degree][m] * cos_m[m]
            block[..., degree - m] = norm * q[degree][m] * sin_m[m]
        harmonics.append(block)
    return harmonics


def real_from_complex(degree: int) -> np.ndarray:
    """Unitary ``Q`` with ``Y_real = Q @ C`` for Racah-normalized complex harmonics ``C``.

    Rows follow the real ordering m = -L..L, columns the complex m = -L..L
    (Condon-Shortley phase on the complex side).
    """
    dim = 2 * degree + 1
    q = np.zeros((dim, dim), dtype=np.complex128)
    q[degree, degree] = 1.0
    root_half = 1.0 / math.sqrt(2.0)
    for m in range(1, degree + 1):
        sign = (-1) ** m
        q[degree + m, degree - m] = root_half
        q[degree + m, degree + m] = sign * root_half
        q[degree - m, degree - m] = 1j * root_half
        q[degree - m, degree + m] = -1j * sign * root_half
    return q
