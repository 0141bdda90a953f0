"""Rigid flow matching: interpolated states, target velocities, and losses.

Between two views the path is LERP on translations and SLERP on
quaternions, per residue. The regression target for a velocity predictor
is the analytic path derivative: t1 - t0 for translations (constant in
tau) and the SLERP tau-derivative in raw quaternion space for rotations.
Losses are squared norms of the prediction residuals, averaged over
residues and tau points; the bi-directional loss adds the same objective
on the swapped pair.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .backbone import ProteinFrames
from .errors import AntipodalPair, Diverged
from .so3 import lerp, matrix_from_quat, quat_from_matrix, slerp, slerp_derivative
from .views import ViewPair

# Deterministic default grid for loss evaluation; excludes the tau = 0.5
# point where forward and backward interpolants coincide.
DEFAULT_TAUS = tuple((k + 0.5) / 10.0 for k in range(10))


def random_taus(n, rng):
    """Uniform-random evaluation times, the stochastic alternative to the
    deterministic DEFAULT_TAUS grid."""
    return tuple(float(x) for x in rng.uniform(0.0, 1.0, n))

DEFAULT_FIT_STEPS = 5000
DEFAULT_FIT_LR = 0.1
DIVERGENCE_PATIENCE = 50


class Direction(enum.Enum):
    FORWARD = "forward"
    BACKWARD = "backward"
    BIDIRECTIONAL = "bidirectional"


@dataclass(frozen=True)
class LossReport:
    """Translation / rotation loss components; total is their sum."""

    l_r3: float
    l_so3: float
    total: float
    direction: Direction


@dataclass
class InterpolatedState:
    """Frames on the interpolation path at time tau."""

    tau: float
    frames: ProteinFrames


@dataclass
class VelocityTarget:
    """Analytic path velocities: u_trans (L, 3), u_rot (L, 4)."""

    u_trans: np.ndarray
    u_rot: np.ndarray


def _check_tau(tau):
    if not 0.0 <= tau <= 1.0:
        raise ValueError(f"tau {tau} outside [0, 1]")


def _pair_quats(pair: ViewPair):
    q0 = np.array([quat_from_matrix(r) for r in pair.g0.r])
    q1 = np.array([quat_from_matrix(r) for r in pair.g1.r])
    return q0, q1


def interpolate(pair: ViewPair, tau: float) -> InterpolatedState:
    """Per-residue LERP/SLERP state between g0 and g1."""
    _check_tau(tau)
    q0, q1 = _pair_quats(pair)
    t = lerp(pair.g0.t, pair.g1.t, tau)
    r = np.empty_like(pair.g0.r)
    for i in range(len(pair.g0)):
        try:
            r[i] = matrix_from_quat(slerp(q0[i], q1[i], tau))
        except AntipodalPair as exc:
            raise AntipodalPair(f"residue {i}: {exc}") from exc
    return InterpolatedState(tau, ProteinFrames(t, r, pair.g0.aa.copy()))


def target_velocity(pair: ViewPair, tau: float) -> VelocityTarget:
    """Analytic velocities of the interpolation path at tau."""
    _check_tau(tau)
    q0, q1 = _pair_quats(pair)
    u_trans = pair.g1.t - pair.g0.t
    u_rot = np.empty((len(pair.g0), 4))
    for i in range(len(pair.g0)):
        try:
            u_rot[i] = slerp_derivative(q0[i], q1[i], tau)
        except AntipodalPair as exc:
            raise AntipodalPair(f"residue {i}: {exc}") from exc
    return VelocityTarget(u_trans, u_rot)


class ZeroPredictor:
    """Predicts zero velocities; useful as a loss baseline."""

    def __call__(self, state: InterpolatedState):
        L = len(state.frames)
        return np.zeros((L, 3)), np.zeros((L, 4))


class SlerpOracle:
    """Returns the exact analytic targets for a known view pair.

    The predictor only sees the interpolated state, so the traversal
    direction is inferred by comparing the state against the forward and
    backward interpolants at the same tau and picking the closer one (ties
    go forward). Exact on any tau grid avoiding 0.5, where the two
    interpolants coincide with opposite targets.
    """

    def __init__(self, pair: ViewPair):
        self.pair = pair

    def __call__(self, state: InterpolatedState):
        fwd = interpolate(self.pair, state.tau).frames
        bwd = interpolate(self.pair.swapped(), state.tau).frames
        d_fwd = np.abs(fwd.t - state.frames.t).max() + np.abs(fwd.r - state.frames.r).max()
        d_bwd = np.abs(bwd.t - state.frames.t).max() + np.abs(bwd.r - state.frames.r).max()
        pair = self.pair if d_fwd <= d_bwd else self.pair.swapped()
        tgt = target_velocity(pair, state.tau)
        return tgt.u_trans, tgt.u_rot


def directional_loss(predictor, pair: ViewPair, taus,
                     direction: Direction = Direction.FORWARD) -> LossReport:
    """Mean squared residual between predicted and target velocities.

    Squared norms are averaged over residues and tau points, with the
    translation and rotation components accumulated separately.
    """
    taus = list(taus)
    if not taus:
        raise ValueError("taus must be nonempty")
    acc_r3 = 0.0
    acc_so3 = 0.0
    for tau in taus:
        state = interpolate(pair, tau)
        pred_t, pred_r = predictor(state)
        tgt = target_velocity(pair, tau)
        acc_r3 += float(((np.asarray(pred_t) - tgt.u_trans) ** 2).sum())
        acc_so3 += float(((np.asarray(pred_r) - tgt.u_rot) ** 2).sum())
    count = len(taus) * len(pair.g0)
    l_r3 = acc_r3 / count
    l_so3 = acc_so3 / count
    return LossReport(l_r3, l_so3, l_r3 + l_so3, direction)


def bidirectional_loss(predictor, pair: ViewPair, taus) -> LossReport:
    """Forward loss on (g0, g1) plus backward loss on the swapped pair."""
    fwd = directional_loss(predictor, pair, taus, Direction.FORWARD)
    bwd = directional_loss(predictor, pair.swapped(), taus, Direction.BACKWARD)
    return LossReport(fwd.l_r3 + bwd.l_r3, fwd.l_so3 + bwd.l_so3,
                      fwd.total + bwd.total, Direction.BIDIRECTIONAL)


def integrate_flow(predictor, g0: ProteinFrames, n_steps: int) -> ProteinFrames:
    """Explicit Euler rollout of a velocity predictor from g0 over [0, 1].

    Quaternions take additive updates; the frame set handed to the
    predictor is re-orthonormalized every step (quaternion rows normalized
    before conversion), and the final state is normalized again before
    returning. The integration accumulator itself is left unprojected:
    projecting it each step would silently cancel the leading quadrature
    error of path-velocity targets and hide the method's first-order
    behavior.
    """
    if n_steps < 1:
        raise ValueError("n_steps must be at least 1")
    h = 1.0 / n_steps
    t = g0.t.copy()
    q = np.array([quat_from_matrix(r) for r in g0.r])

    def unit_rows(a):
        return a / np.linalg.norm(a, axis=1, keepdims=True)

    for k in range(n_steps):
        r = np.array([matrix_from_quat(qi) for qi in unit_rows(q)])
        state = InterpolatedState(k * h, ProteinFrames(t, r, g0.aa.copy()))
        u_t, u_q = predictor(state)
        t = t + h * np.asarray(u_t)
        q = q + h * np.asarray(u_q)
    r = np.array([matrix_from_quat(qi) for qi in unit_rows(q)])
    return ProteinFrames(t, r, g0.aa.copy())


@dataclass
class TabularPredictor:
    """Free velocity values per (tau grid point, residue).

    Lookup requires the state's tau to sit on the grid (within 1e-9).
    """

    taus: tuple
    u_trans: np.ndarray  # (n_tau, L, 3)
    u_rot: np.ndarray    # (n_tau, L, 4)

    def _index(self, tau):
        diffs = np.abs(np.asarray(self.taus) - tau)
        k = int(np.argmin(diffs))
        if diffs[k] > 1e-9:
            raise KeyError(f"tau {tau} not on the table grid")
        return k

    def __call__(self, state: InterpolatedState):
        k = self._index(state.tau)
        return self.u_trans[k], self.u_rot[k]

    @classmethod
    def zeros(cls, taus, L):
        taus = tuple(taus)
        return cls(taus, np.zeros((len(taus), L, 3)), np.zeros((len(taus), L, 4)))


def fit_tabular_predictor(pair: ViewPair, taus=DEFAULT_TAUS,
                          steps: int = DEFAULT_FIT_STEPS, lr: float = DEFAULT_FIT_LR,
                          init: TabularPredictor | None = None):
    """Gradient-descend a lookup table onto the analytic targets.

    Each table entry sees a decoupled quadratic; the gradient of the mean
    squared loss w.r.t. an entry is 2 * (pred - target) / (n_tau * L).
    Raises :class:`Diverged` if the loss increases for 50 consecutive
    steps. Returns the fitted table and its final loss report.
    """
    if steps < 1:
        raise ValueError("steps must be at least 1")
    if lr <= 0.0:
        raise ValueError("lr must be positive")
    taus = tuple(taus)
    L = len(pair.g0)
    tgt_trans = pair.g1.t - pair.g0.t
    tgt_rot = np.array([target_velocity(pair, tau).u_rot for tau in taus])

    table = init if init is not None else TabularPredictor.zeros(taus, L)
    a_trans = table.u_trans.copy()
    a_rot = table.u_rot.copy()
    count = len(taus) * L

    def current_loss():
        res_t = a_trans - tgt_trans[None, :, :]
        res_r = a_rot - tgt_rot
        return float((res_t ** 2).sum() + (res_r ** 2).sum()) / count

    prev = current_loss()
    rising = 0
    for _ in range(steps):
        a_trans -= lr * 2.0 * (a_trans - tgt_trans[None, :, :]) / count
        a_rot -= lr * 2.0 * (a_rot - tgt_rot) / count
        loss = current_loss()
        rising = rising + 1 if loss > prev else 0
        if rising >= DIVERGENCE_PATIENCE:
            raise Diverged(f"loss rose for {DIVERGENCE_PATIENCE} consecutive steps")
        prev = loss

    fitted = TabularPredictor(taus, a_trans, a_rot)
    return fitted, directional_loss(fitted, pair, taus)
