"""Rotation representations and interpolation on SO(3).

Conventions used throughout the package:

- rotation matrices are 3x3 float64 arrays, right-handed, acting on column
  vectors (``y = R @ x``);
- quaternions are length-4 arrays ``[w, x, y, z]`` with the scalar part
  first; conversions return the w >= 0 representative of the double cover;
- rotation vectors are axis * angle in radians with angle in [0, pi].
"""

from __future__ import annotations

import numpy as np

from .errors import AngleAtPi, AntipodalPair

# Below this angle the Rodrigues coefficients use their Taylor expansions.
SMALL_ANGLE = 1e-8
# Below this quaternion arc SLERP falls back to normalized LERP.
SMALL_ARC = 1e-7
# Inputs this close to a 180-degree rotation are rejected as singular.
PI_MARGIN = 1e-6


def hat(v):
    """Skew-symmetric matrix of ``v``, so that ``hat(v) @ p == cross(v, p)``."""
    v = np.asarray(v, dtype=float)
    return np.array([
        [0.0, -v[2], v[1]],
        [v[2], 0.0, -v[0]],
        [-v[1], v[0], 0.0],
    ])


def vee(m):
    """Inverse of :func:`hat`: extract the 3-vector from a skew matrix."""
    m = np.asarray(m, dtype=float)
    return np.array([m[2, 1], m[0, 2], m[1, 0]])


def exp_map(omega):
    """Rodrigues rotation matrix for the rotation vector ``omega``.

    Uses second-order Taylor expansions of sin(t)/t and (1-cos(t))/t**2
    below ``SMALL_ANGLE`` to avoid 0/0.
    """
    omega = np.asarray(omega, dtype=float)
    theta2 = float(omega @ omega)
    theta = np.sqrt(theta2)
    k = hat(omega)
    if theta < SMALL_ANGLE:
        a = 1.0 - theta2 / 6.0
        b = 0.5 - theta2 / 24.0
    else:
        a = np.sin(theta) / theta
        b = (1.0 - np.cos(theta)) / theta2
    return np.eye(3) + a * k + b * (k @ k)


def log_map(r):
    """Rotation vector of the rotation matrix ``r``.

    The angle is ``arccos((trace(r) - 1) / 2)`` with the argument clamped to
    [-1, 1]. Raises :class:`AngleAtPi` within ``PI_MARGIN`` of a 180-degree
    rotation, where the (r - r^T) formula loses the axis.
    """
    r = np.asarray(r, dtype=float)
    cos_theta = np.clip((np.trace(r) - 1.0) / 2.0, -1.0, 1.0)
    theta = float(np.arccos(cos_theta))
    if theta > np.pi - PI_MARGIN:
        raise AngleAtPi(f"rotation angle {theta:.9f} within {PI_MARGIN} of pi")
    if theta < SMALL_ANGLE:
        factor = 0.5 * (1.0 + theta * theta / 6.0)
    else:
        factor = theta / (2.0 * np.sin(theta))
    return factor * vee(r - r.T)


def rotation_angle(r):
    """Geodesic angle of a rotation matrix, in [0, pi]."""
    r = np.asarray(r, dtype=float)
    return float(np.arccos(np.clip((np.trace(r) - 1.0) / 2.0, -1.0, 1.0)))


def angle_between(r0, r1):
    """Geodesic distance between two rotation matrices."""
    return rotation_angle(np.asarray(r0).T @ np.asarray(r1))


def quat_from_matrix(r):
    """Unit quaternion [w, x, y, z] of a rotation matrix, with w >= 0.

    Shepperd's branching on the largest diagonal term keeps the conversion
    stable for all rotation angles including 180 degrees.
    """
    m = np.asarray(r, dtype=float)
    tr = m[0, 0] + m[1, 1] + m[2, 2]
    if tr > 0.0:
        s = 2.0 * np.sqrt(tr + 1.0)
        q = np.array([
            0.25 * s,
            (m[2, 1] - m[1, 2]) / s,
            (m[0, 2] - m[2, 0]) / s,
            (m[1, 0] - m[0, 1]) / s,
        ])
    elif m[0, 0] >= m[1, 1] and m[0, 0] >= m[2, 2]:
        s = 2.0 * np.sqrt(1.0 + m[0, 0] - m[1, 1] - m[2, 2])
        q = np.array([
            (m[2, 1] - m[1, 2]) / s,
            0.25 * s,
            (m[0, 1] + m[1, 0]) / s,
            (m[0, 2] + m[2, 0]) / s,
        ])
    elif m[1, 1] >= m[2, 2]:
        s = 2.0 * np.sqrt(1.0 + m[1, 1] - m[0, 0] - m[2, 2])
        q = np.array([
            (m[0, 2] - m[2, 0]) / s,
            (m[0, 1] + m[1, 0]) / s,
            0.25 * s,
            (m[1, 2] + m[2, 1]) / s,
        ])
    else:
        s = 2.0 * np.sqrt(1.0 + m[2, 2] - m[0, 0] - m[1, 1])
        q = np.array([
            (m[1, 0] - m[0, 1]) / s,
            (m[0, 2] + m[2, 0]) / s,
            (m[1, 2] + m[2, 1]) / s,
            0.25 * s,
        ])
    q = q / np.linalg.norm(q)
    if q[0] < 0.0:
        q = -q
    return q


def matrix_from_quat(q):
    """Rotation matrix of a unit quaternion [w, x, y, z]."""
    w, x, y, z = np.asarray(q, dtype=float)
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
        [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
        [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
    ])


def _aligned(q0, q1):
    """Hemisphere-fix q1 toward q0 and return (q1, dot) with dot >= 0.

    Raises :class:`AntipodalPair` when the quaternions are a quarter turn
    apart on S^3 (rotations 180 degrees apart), where the geodesic is not
    unique.
    """
    d = float(q0 @ q1)
    if d < 0.0:
        q1 = -q1
        d = -d
    if d < SMALL_ARC:
        raise AntipodalPair("rotations are antipodal; interpolation path not unique")
    return q1, min(d, 1.0)


def slerp(q0, q1, tau):
    """Spherical linear interpolation between unit quaternions.

    ``q1`` is negated first when dot(q0, q1) < 0 so the path follows the
    shortest arc. Arcs below ``SMALL_ARC`` use normalized LERP.
    """
    q0 = np.asarray(q0, dtype=float)
    q1 = np.asarray(q1, dtype=float)
    q1, d = _aligned(q0, q1)
    phi = float(np.arccos(d))
    if phi < SMALL_ARC:
        out = (1.0 - tau) * q0 + tau * q1
        return out / np.linalg.norm(out)
    s = np.sin(phi)
    return (np.sin((1.0 - tau) * phi) * q0 + np.sin(tau * phi) * q1) / s


def slerp_derivative(q0, q1, tau):
    """Analytic d/dtau of :func:`slerp`, as a free R^4 tangent vector.

    Differentiating the SLERP formula in tau gives
    ``(-phi*cos((1-tau)*phi)*q0 + phi*cos(tau*phi)*q1) / sin(phi)``,
    with the small-arc limit ``q1 - q0``. The norm equals the arc phi for
    every tau (constant-speed geodesic).
    """
    q0 = np.asarray(q0, dtype=float)
    q1 = np.asarray(q1, dtype=float)
    q1, d = _aligned(q0, q1)
    phi = float(np.arccos(d))
    if phi < SMALL_ARC:
        return q1 - q0
    s = np.sin(phi)
    return (-phi * np.cos((1.0 - tau) * phi) * q0 + phi * np.cos(tau * phi) * q1) / s


def lerp(t0, t1, tau):
    """Linear interpolation ``tau*t1 + (1-tau)*t0``."""
    t0 = np.asarray(t0, dtype=float)
    t1 = np.asarray(t1, dtype=float)
    return tau * t1 + (1.0 - tau) * t0


def is_rotation_matrix(r, tol=1e-9):
    """True when ``r`` is orthonormal with determinant 1 within ``tol``."""
    r = np.asarray(r, dtype=float)
    if r.shape != (3, 3):
        return False
    ortho = np.abs(r.T @ r - np.eye(3)).max() <= tol
    return bool(ortho and abs(np.linalg.det(r) - 1.0) <= tol)


def random_quaternion(rng):
    """Uniform random unit quaternion (w >= 0 not enforced)."""
    q = rng.standard_normal(4)
    return q / np.linalg.norm(q)
