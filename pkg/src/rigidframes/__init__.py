"""Rigid-body geometry engine for protein backbones.

Frames from backbone atoms, inertial canonicalization, isotropic Gaussian
rotation sampling, paired-view construction, and rigid flow-matching
targets and losses, with a JSONL pipeline CLI (``rigidframes``).
"""

from .backbone import (
    ProteinBackbone,
    ProteinFrames,
    Residue,
    RigidTransform,
    backbone_from_frames,
    distogram_bin,
    frames_from_backbone,
    parse_backbone,
    parse_models,
)
from .canonicalize import CanonicalPose, canonicalize, center_of_mass, inertia_tensor, principal_axes
from .errors import (
    AngleAtPi,
    AntipodalPair,
    CollinearAtoms,
    DegenerateDensity,
    DegenerateInertia,
    Diverged,
    MalformedRecord,
    NoResidues,
    ResidueMismatch,
    RigidFramesError,
    TrajectoryTooShort,
)
from .flowmatch import (
    DEFAULT_TAUS,
    Direction,
    InterpolatedState,
    LossReport,
    SlerpOracle,
    TabularPredictor,
    VelocityTarget,
    ZeroPredictor,
    bidirectional_loss,
    directional_loss,
    fit_tabular_predictor,
    integrate_flow,
    interpolate,
    random_taus,
    target_velocity,
)
from .igso3 import (
    AngleDensityTable,
    IGSO3Params,
    angle_pdf_approx,
    angle_pdf_series,
    build_table,
    default_table,
    sample_angle,
    sample_axis,
    sample_rotation,
    uniform_limit_pdf,
)
from .so3 import (
    exp_map,
    hat,
    lerp,
    log_map,
    matrix_from_quat,
    quat_from_matrix,
    slerp,
    slerp_derivative,
    vee,
)
from .views import (
    PerturbConfig,
    Provenance,
    TrajectorySeries,
    ViewPair,
    extract_md_pairs,
    make_phase1_pair,
    perturb_rotation,
    perturb_translation,
    rotation_displacement,
)

__version__ = "0.1.0"
