"""Inertial canonicalization: center structures and align to principal axes.

The centered CA cloud defines the inertia tensor
``I = sum(|x|^2 I3 - x x^T)``; its eigenvectors, sorted by ascending
eigenvalue and sign-fixed deterministically, form the axes V. Structures
are expressed in the principal-axes frame by the left action

    t' = V^T (t - centroid),   r' = V^T r,

under which the canonical output is invariant to any rigid transform of
the input (for non-degenerate inertia).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .backbone import ProteinFrames
from .errors import DegenerateInertia

# Relative eigenvalue gap below which principal axes are not unique.
DEGENERATE_GAP = 1e-8


@dataclass(frozen=True)
class CanonicalPose:
    """Inverse data of a canonicalization: centroid, axes V, and moments."""

    centroid: np.ndarray
    axes: np.ndarray
    moments: np.ndarray


def center_of_mass(frames: ProteinFrames) -> np.ndarray:
    """Unweighted mean of the CA positions."""
    return frames.t.mean(axis=0)


def inertia_tensor(centered) -> np.ndarray:
    """Inertia tensor of centered points: sum(|x|^2 I3 - x x^T), unit masses."""
    x = np.asarray(centered, dtype=float)
    return float((x * x).sum()) * np.eye(3) - x.T @ x


def _check_gaps(moments):
    scale = max(float(np.abs(moments).max()), 1e-300)
    gaps = np.diff(moments)
    if gaps.min() / scale < DEGENERATE_GAP:
        raise DegenerateInertia(
            f"relative eigenvalue gap {gaps.min() / scale:.3e} below {DEGENERATE_GAP}"
        )


def principal_axes(inertia):
    """Eigenvectors of a symmetric matrix, ascending, sign-fixed, det +1.

    Each of the first two columns is negated when its largest-magnitude
    entry is negative (ties broken by lowest index); the third column is
    replaced by the cross product of the first two, which fixes det = +1.
    Raises :class:`DegenerateInertia` for near-equal eigenvalues.
    """
    inertia = np.asarray(inertia, dtype=float)
    if np.abs(inertia - inertia.T).max() > 1e-9:
        raise ValueError("inertia tensor must be symmetric")
    moments, axes = np.linalg.eigh(inertia)
    _check_gaps(moments)
    axes = axes.copy()
    for k in (0, 1):
        j = int(np.argmax(np.abs(axes[:, k])))
        if axes[j, k] < 0.0:
            axes[:, k] = -axes[:, k]
    axes[:, 2] = np.cross(axes[:, 0], axes[:, 1])
    return axes, moments


def _axes_for_cloud(centered):
    """Principal axes of a centered point cloud, signs fixed by the data.

    The sign of each of the first two axes is chosen so the
    largest-magnitude projection of the cloud onto the axis is positive
    (ties broken by lowest point index). Projections are invariant under
    rigid motions of the cloud, so the resulting axes rotate with the data
    and the canonical coordinates come out pose-independent, which the
    ambient-component rule of :func:`principal_axes` cannot provide.
    """
    moments, axes = np.linalg.eigh(inertia_tensor(centered))
    _check_gaps(moments)
    axes = axes.copy()
    for k in (0, 1):
        proj = centered @ axes[:, k]
        j = int(np.argmax(np.abs(proj)))
        if proj[j] < 0.0:
            axes[:, k] = -axes[:, k]
    axes[:, 2] = np.cross(axes[:, 0], axes[:, 1])
    return axes, moments


def canonicalize(frames: ProteinFrames) -> tuple[ProteinFrames, CanonicalPose]:
    """Express ``frames`` in their inertial reference frame.

    Returns the canonical frames together with the :class:`CanonicalPose`
    needed to invert the motion. Raises :class:`DegenerateInertia` when the
    structure has no unique principal axes (symmetric or near-linear
    bodies, including anything with fewer than 3 residues).
    """
    centroid = center_of_mass(frames)
    centered = frames.t - centroid
    axes, moments = _axes_for_cloud(centered)
    t = centered @ axes
    r = np.einsum("ab,ibc->iac", axes.T, frames.r)
    return ProteinFrames(t, r, frames.aa.copy()), CanonicalPose(centroid, axes, moments)
