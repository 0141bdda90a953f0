"""Array-in/array-out bindings over the rigidframes pipeline.

Training code hands in plain float64 arrays (translations L x 3, unit
quaternions L x 4 in [w, x, y, z] order) and gets arrays back; no opaque
handles cross the boundary. Each call converts at the edge, runs the
primary library, and copies results out, so calls are independent and
reentrant; the heavy lifting happens inside numpy kernels, which do not
hold the interpreter lock.

Library failures surface as ValueError with the primary error's class
name in the message (e.g. "DegenerateInertia: ...").
"""

from __future__ import annotations

import numpy as np

from rigidframes import (
    PerturbConfig,
    ProteinFrames,
    Residue,
    RigidFramesError,
    TrajectorySeries,
)
from rigidframes import canonicalize as _canonicalize
from rigidframes import extract_md_pairs as _extract_md_pairs
from rigidframes import frames_from_backbone as _frames_from_backbone
from rigidframes import interpolate as _interpolate
from rigidframes import make_phase1_pair as _make_phase1_pair
from rigidframes import target_velocity as _target_velocity
from rigidframes.backbone import ProteinBackbone, UNKNOWN_AA
from rigidframes.records import frames_quats
from rigidframes.so3 import matrix_from_quat
from rigidframes.views import Provenance, ViewPair

__version__ = "0.1.0"

__all__ = [
    "frames_from_coords",
    "canonicalize_frames",
    "phase1_pair",
    "md_pairs",
    "interpolate_pair",
    "fm_target",
]


def _frames(t, q, aa=None) -> ProteinFrames:
    t = np.ascontiguousarray(t, dtype=float)
    q = np.ascontiguousarray(q, dtype=float)
    if t.ndim != 2 or t.shape[1] != 3 or q.shape != (t.shape[0], 4):
        raise ValueError(f"expected t (L, 3) and q (L, 4), got {t.shape} and {q.shape}")
    if np.abs(np.linalg.norm(q, axis=1) - 1.0).max() > 1e-9:
        raise ValueError("quaternions must be unit within 1e-9")
    if aa is None:
        aa = np.full(t.shape[0], UNKNOWN_AA, dtype=int)
    r = np.array([matrix_from_quat(qi) for qi in q])
    return ProteinFrames(t, r, aa)


def _arrays(frames: ProteinFrames):
    return frames.t.copy(), frames_quats(frames)


def _pair(t0, q0, t1, q1, aa=None) -> ViewPair:
    return ViewPair(_frames(t0, q0, aa), _frames(t1, q1, aa), Provenance(kind="perturb"))


def _call(fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except RigidFramesError as exc:
        raise ValueError(f"{type(exc).__name__}: {exc}") from exc


def frames_from_coords(n, ca, c, aa=None):
    """Rigid frames from backbone atom coordinates.

    n, ca, c: (L, 3) arrays in Angstrom. Returns (t, q) with t the CA
    positions and q unit quaternions (w >= 0) of the Gram-Schmidt frames.
    """
    n = np.asarray(n, dtype=float)
    ca = np.asarray(ca, dtype=float)
    c = np.asarray(c, dtype=float)
    if aa is None:
        aa = np.full(len(ca), UNKNOWN_AA, dtype=int)
    bb = ProteinBackbone([
        Residue(n[i], ca[i], c[i], int(aa[i])) for i in range(len(ca))
    ])
    return _arrays(_call(_frames_from_backbone, bb))


def canonicalize_frames(t, q, aa=None):
    """Align frames to their inertial reference frame.

    Returns (t', q', centroid, axes); the pose inverts the motion via
    t = t' @ axes.T + centroid.
    """
    frames, pose = _call(_canonicalize, _frames(t, q, aa))
    t2, q2 = _arrays(frames)
    return t2, q2, pose.centroid.copy(), pose.axes.copy()


def phase1_pair(t, q, sigma, epsilon, seed, aa=None):
    """Canonicalize and build the perturbed Phase-I view.

    Bit-identical to the primary pipeline under the same seed (per-residue
    substreams keyed by (seed, residue index)). Returns (t0, q0, t1, q1).
    """
    config = PerturbConfig(sigma=float(sigma), epsilon=float(epsilon), seed=int(seed))
    pair = _call(_make_phase1_pair, _frames(t, q, aa), config)
    t0, q0 = _arrays(pair.g0)
    t1, q1 = _arrays(pair.g1)
    return t0, q0, t1, q1


def md_pairs(n, ca, c, times, delta=2.0, stride=None, aa=None):
    """Phase-II pairs from stacked snapshot coordinates.

    n, ca, c: (S, L, 3) stacks; times: (S,) in ns, strictly increasing.
    Returns a list of (t0, q0, t1, q1, s) tuples, each view canonicalized.
    """
    n = np.asarray(n, dtype=float)
    ca = np.asarray(ca, dtype=float)
    c = np.asarray(c, dtype=float)
    S, L = ca.shape[0], ca.shape[1]
    if aa is None:
        aa = np.full(L, UNKNOWN_AA, dtype=int)
    snapshots = [
        ProteinBackbone([Residue(n[s, i], ca[s, i], c[s, i], int(aa[i])) for i in range(L)])
        for s in range(S)
    ]
    traj = TrajectorySeries(snapshots, [float(x) for x in times])
    pairs = _call(_extract_md_pairs, traj, delta, stride)
    out = []
    for pair in pairs:
        t0, q0 = _arrays(pair.g0)
        t1, q1 = _arrays(pair.g1)
        out.append((t0, q0, t1, q1, pair.provenance.s))
    return out


def interpolate_pair(t0, q0, t1, q1, tau, aa=None):
    """LERP/SLERP state between two views at time tau; returns (t, q)."""
    state = _call(_interpolate, _pair(t0, q0, t1, q1, aa), float(tau))
    return _arrays(state.frames)


def fm_target(t0, q0, t1, q1, tau, aa=None):
    """Flow-matching target velocities at tau: (u_trans (L,3), u_rot (L,4))."""
    tgt = _call(_target_velocity, _pair(t0, q0, t1, q1, aa), float(tau))
    return tgt.u_trans.copy(), tgt.u_rot.copy()
