"""Exception types raised by the geometry engine."""


class RigidFramesError(Exception):
    """Base class for all library errors."""


class AngleAtPi(RigidFramesError):
    """Rotation is within tolerance of 180 degrees; the log map is singular."""


class AntipodalPair(RigidFramesError):
    """Quaternions are antipodal as rotations; the geodesic is not unique."""


class DegenerateDensity(RigidFramesError):
    """Tabulated angle density underflowed to zero everywhere."""


class DegenerateInertia(RigidFramesError):
    """Inertia eigenvalues too close; principal axes are not unique."""


class CollinearAtoms(RigidFramesError):
    """Backbone atoms are collinear; the Gram-Schmidt frame is undefined."""


class NoResidues(RigidFramesError):
    """Fewer than two complete residues found in the input."""


class MalformedRecord(RigidFramesError):
    """An input record (PDB ATOM line or JSONL row) could not be parsed."""


class TrajectoryTooShort(RigidFramesError):
    """Trajectory time span is shorter than the requested pairing interval."""


class ResidueMismatch(RigidFramesError):
    """Trajectory snapshots disagree on residue count."""


class Diverged(RigidFramesError):
    """Gradient descent loss increased for too many consecutive steps."""
