"""Paired views of a protein: simulated SE(3) perturbation and MD extraction.

Phase I perturbs each residue of a canonicalized structure independently:
Gaussian noise on the translation and an identity-centered isotropic
Gaussian rotation applied on the right. Phase II pairs time-separated
snapshots of an MD trajectory, canonicalizing each snapshot.

Per-residue noise uses an rng substream seeded by (seed, residue index),
so results do not depend on iteration order or thread count. The perturbed
view is not re-canonicalized; doing so would couple the per-residue noise
globally.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .backbone import ProteinFrames, frames_from_backbone
from .canonicalize import CanonicalPose, canonicalize
from .errors import ResidueMismatch, TrajectoryTooShort
from .igso3 import AngleDensityTable, default_table, sample_rotation
from .so3 import exp_map

DEFAULT_DELTA_NS = 2.0


@dataclass(frozen=True)
class PerturbConfig:
    """Noise scales and seed for Phase-I view construction."""

    sigma: float = 0.03
    epsilon: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.sigma < 0.0:
            raise ValueError("sigma must be nonnegative")
        if self.epsilon <= 0.0:
            raise ValueError("epsilon must be positive")


@dataclass(frozen=True)
class Provenance:
    """How a view pair was constructed, with its parameters."""

    kind: str  # "perturb" or "md"
    sigma: float | None = None
    epsilon: float | None = None
    seed: int | None = None
    source: str | None = None
    s: float | None = None
    delta: float | None = None


@dataclass
class ViewPair:
    """Two conformations (g0, g1) of the same protein.

    g0 is always canonical. For perturb provenance g1 lives in g0's
    canonical coordinates but is not itself canonical; for MD provenance
    both views are canonicalized separately (pose1 records g1's own pose).
    """

    g0: ProteinFrames
    g1: ProteinFrames
    provenance: Provenance
    pose0: CanonicalPose | None = None
    pose1: CanonicalPose | None = None

    def __post_init__(self):
        if len(self.g0) != len(self.g1):
            raise ValueError("view pair length mismatch")

    def swapped(self) -> "ViewPair":
        return ViewPair(self.g1, self.g0, self.provenance, self.pose1, self.pose0)


@dataclass
class TrajectorySeries:
    """Ordered MD snapshots with strictly increasing times in ns."""

    snapshots: list
    times: list[float]
    source: str = ""

    def __post_init__(self):
        if len(self.snapshots) != len(self.times):
            raise ValueError("snapshots and times length mismatch")
        if len(self.times) >= 2 and np.diff(self.times).min() <= 0.0:
            raise ValueError("times must be strictly increasing")


def perturb_translation(t, sigma, rng):
    """t + sigma * z with z ~ N(0, I3) drawn from ``rng``."""
    return np.asarray(t, dtype=float) + sigma * rng.standard_normal(3)


def perturb_rotation(r, epsilon, rng, table: AngleDensityTable | None = None):
    """r @ r_noise with r_noise an identity-centered IGSO(3) draw.

    Right multiplication applies the noise in the body frame. ``table``
    short-circuits rebuilding the angle table in hot loops.
    """
    if table is None:
        table = default_table(epsilon)
    noise = sample_rotation(np.eye(3), table, rng)
    return np.asarray(r, dtype=float) @ noise


def make_phase1_pair(frames: ProteinFrames, config: PerturbConfig) -> ViewPair:
    """Canonicalize ``frames`` and perturb every residue independently.

    Residue i consumes its own substream seeded by (config.seed, i), with
    the translation noise drawn before the rotation noise.
    """
    g0, pose = canonicalize(frames)
    table = default_table(config.epsilon)
    t1 = np.empty_like(g0.t)
    r1 = np.empty_like(g0.r)
    for i in range(len(g0)):
        rng = np.random.default_rng((config.seed, i))
        t1[i] = perturb_translation(g0.t[i], config.sigma, rng)
        r1[i] = perturb_rotation(g0.r[i], config.epsilon, rng, table)
    g1 = ProteinFrames(t1, r1, g0.aa.copy())
    prov = Provenance(kind="perturb", sigma=config.sigma, epsilon=config.epsilon,
                      seed=config.seed)
    return ViewPair(g0, g1, prov, pose0=pose, pose1=pose)


def extract_md_pairs(traj: TrajectorySeries, delta: float = DEFAULT_DELTA_NS,
                     stride: float | None = None) -> list[ViewPair]:
    """Canonicalized snapshot pairs (s, s + delta) on a stride grid.

    Start times step by ``stride`` (default: delta, giving disjoint
    windows) from the first snapshot time; each endpoint is matched to the
    nearest snapshot within stride/2 and the pair is dropped when either
    endpoint has no match.
    """
    if delta <= 0.0:
        raise ValueError("delta must be positive")
    if stride is None:
        stride = delta
    times = np.asarray(traj.times, dtype=float)
    lengths = {len(s) for s in traj.snapshots}
    if len(lengths) > 1:
        raise ResidueMismatch(f"snapshot residue counts differ: {sorted(lengths)}")
    span = times[-1] - times[0]
    if span < delta:
        raise TrajectoryTooShort(f"trajectory span {span} ns shorter than delta {delta} ns")

    tol = stride / 2.0
    n_starts = int(np.floor((span - delta) / stride + 1e-9)) + 1
    pairs = []
    for k in range(n_starts):
        s = times[0] + k * stride
        i0 = int(np.argmin(np.abs(times - s)))
        i1 = int(np.argmin(np.abs(times - (s + delta))))
        if abs(times[i0] - s) > tol or abs(times[i1] - (s + delta)) > tol:
            continue
        g0, pose0 = canonicalize(frames_from_backbone(traj.snapshots[i0]))
        g1, pose1 = canonicalize(frames_from_backbone(traj.snapshots[i1]))
        prov = Provenance(kind="md", source=traj.source, s=float(times[i0]), delta=delta)
        pairs.append(ViewPair(g0, g1, prov, pose0=pose0, pose1=pose1))
    return pairs


def rotation_displacement(r0, omega, p):
    """Displacement r0 @ (exp(hat(omega)) - I) @ p of point p when the
    rotation r0 is perturbed on the right by the body-frame vector omega.

    For a fixed world-frame axis, the body-frame vector realizing it is
    omega = theta * r0.T @ axis; equal-angle perturbations about the same
    world axis then displace p by amounts that depend on r0.
    """
    r0 = np.asarray(r0, dtype=float)
    p = np.asarray(p, dtype=float)
    return r0 @ ((exp_map(omega) - np.eye(3)) @ p)
