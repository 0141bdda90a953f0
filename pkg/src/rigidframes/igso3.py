"""Isotropic Gaussian on SO(3): angle density, tabulated CDF, and sampling.

The distribution factorizes in axis-angle coordinates: the axis is uniform
on the sphere and the angle theta in [0, pi] follows

    p(theta) = (1 - cos theta) / pi
               * sum_{l>=0} (2l+1) exp(-l(l+1) eps^2)
                 * sin((l + 1/2) theta) / sin(theta / 2).

For small eps the sum converges slowly and a closed-form heat-kernel
asymptotic is used instead. Sampling a full rotation about a mean mu
composes mu with an identity-centered draw: r = mu @ exp(theta * axis).

The overall normalization constant of the density on SO(3) is never needed:
only the (already normalized) angle marginal enters the sampler.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DegenerateDensity
from .so3 import exp_map

# Series terms are added until their uniform bound drops below this.
SERIES_TOL = 1e-12


@dataclass(frozen=True)
class IGSO3Params:
    """Concentration plus tabulation controls for one angle table."""

    epsilon: float
    l_max: int = 2000
    grid_size: int = 8192
    approx_threshold: float = 0.1

    def __post_init__(self):
        if self.epsilon <= 0.0:
            raise ValueError("epsilon must be positive")
        if self.grid_size < 256:
            raise ValueError("grid_size must be at least 256")
        if self.l_max < 1:
            raise ValueError("l_max must be at least 1")


@dataclass(frozen=True)
class AngleDensityTable:
    """Tabulated angle pdf/cdf on a uniform grid over [0, pi].

    ``pdf`` is renormalized so its trapezoidal integral is 1; ``cdf`` is the
    cumulative trapezoid with cdf[0] = 0 and cdf[-1] = 1 exactly.
    ``raw_integral`` records the trapezoidal mass before renormalization.
    """

    epsilon: float
    thetas: np.ndarray
    pdf: np.ndarray
    cdf: np.ndarray
    raw_integral: float


def uniform_limit_pdf(theta):
    """Angle density of the uniform distribution on SO(3): (1 - cos theta)/pi."""
    return (1.0 - np.cos(np.asarray(theta, dtype=float))) / np.pi


def angle_pdf_series(theta, epsilon, l_max=2000):
    """Truncated series evaluation of the angle density.

    The theta -> 0 limit of sin((l+1/2)theta)/sin(theta/2) is evaluated as
    2l+1. Terms stop early once their uniform (Dirichlet-kernel) bound
    (2l+1)^2 exp(-l(l+1) eps^2) falls below ``SERIES_TOL``. Truncation can
    leave tiny negative values; those are clamped to 0.
    """
    theta = np.asarray(theta, dtype=float)
    scalar = theta.ndim == 0
    theta = np.atleast_1d(theta)
    eps2 = epsilon * epsilon

    half = 0.5 * theta
    sin_half = np.sin(half)
    tiny = np.abs(theta) < 1e-12
    safe_sin = np.where(tiny, 1.0, sin_half)

    total = np.zeros_like(theta)
    for l in range(l_max + 1):
        coef = (2 * l + 1) * np.exp(-l * (l + 1) * eps2)
        ratio = np.where(tiny, 2 * l + 1, np.sin((l + 0.5) * theta) / safe_sin)
        total += coef * ratio
        if (2 * l + 1) ** 2 * np.exp(-l * (l + 1) * eps2) < SERIES_TOL:
            break
    out = (1.0 - np.cos(theta)) / np.pi * np.clip(total, 0.0, None)
    return float(out[0]) if scalar else out


def angle_pdf_approx(theta, epsilon):
    """Closed-form small-eps asymptotic of the angle density.

    The asymptotic is a Gaussian in theta with variance scale t = eps^2,
    wrapped over the +-2*pi images. Exponents are combined before
    exponentiating (exp(pi*(theta - pi)/t) stays <= 1 on [0, pi]) so the
    wrap terms cannot overflow at small eps. The theta -> 0 limit of the
    bracket / (2 sin(theta/2)) factor is substituted analytically.
    """
    theta = np.asarray(theta, dtype=float)
    scalar = theta.ndim == 0
    theta = np.atleast_1d(theta)
    t = epsilon * epsilon

    wrap_plus = (theta - 2.0 * np.pi) * np.exp(np.pi * (theta - np.pi) / t)
    wrap_minus = (theta + 2.0 * np.pi) * np.exp(-np.pi * (theta + np.pi) / t)
    bracket = theta - (wrap_plus + wrap_minus)

    tiny = np.abs(theta) < 1e-12
    limit = 1.0 - np.exp(-np.pi * np.pi / t) * (2.0 - 4.0 * np.pi * np.pi / t)
    ratio = np.where(tiny, limit, bracket / (2.0 * np.sin(np.where(tiny, 1.0, 0.5 * theta))))

    gauss = np.sqrt(np.pi) * t ** (-1.5) * np.exp(t / 4.0) * np.exp(-(0.5 * theta) ** 2 / t)
    out = (1.0 - np.cos(theta)) / np.pi * gauss * ratio
    out = np.clip(out, 0.0, None)
    return float(out[0]) if scalar else out


def build_table(params: IGSO3Params) -> AngleDensityTable:
    """Tabulate the angle pdf and its CDF for inverse-transform sampling.

    The series is used for epsilon >= params.approx_threshold, the
    asymptotic below it. Raises :class:`DegenerateDensity` when every pdf
    value underflows.
    """
    thetas = np.linspace(0.0, np.pi, params.grid_size)
    if params.epsilon >= params.approx_threshold:
        pdf = angle_pdf_series(thetas, params.epsilon, params.l_max)
    else:
        pdf = angle_pdf_approx(thetas, params.epsilon)

    if not np.any(pdf > 1e-300):
        raise DegenerateDensity(f"angle pdf underflowed for epsilon={params.epsilon}")

    raw_integral = float(np.trapezoid(pdf, thetas))
    pdf = pdf / raw_integral

    dtheta = thetas[1] - thetas[0]
    increments = 0.5 * (pdf[1:] + pdf[:-1]) * dtheta
    cdf = np.concatenate([[0.0], np.cumsum(increments)])
    cdf = cdf / cdf[-1]

    return AngleDensityTable(
        epsilon=params.epsilon,
        thetas=thetas,
        pdf=pdf,
        cdf=cdf,
        raw_integral=raw_integral,
    )


@lru_cache(maxsize=32)
def _cached_table(params: IGSO3Params) -> AngleDensityTable:
    return build_table(params)


def default_table(epsilon: float) -> AngleDensityTable:
    """Table for ``epsilon`` with default tabulation parameters, cached."""
    return _cached_table(IGSO3Params(epsilon=epsilon))


def sample_angle(table: AngleDensityTable, u):
    """Inverse-transform the CDF at ``u`` in [0, 1] (scalar or array)."""
    return np.interp(u, table.cdf, table.thetas)


def sample_axis(rng):
    """Uniform unit axis from a normalized 3D standard Gaussian draw."""
    while True:
        v = rng.standard_normal(3)
        n = np.linalg.norm(v)
        if n >= 1e-8:
            return v / n


def sample_rotation(mu, table: AngleDensityTable, rng):
    """Draw r = mu @ exp(theta * axis) with theta from the angle table.

    The rng is consumed in a fixed order (axis first, then angle) so equal
    seeds give bit-identical streams.
    """
    axis = sample_axis(rng)
    theta = float(sample_angle(table, rng.random()))
    return np.asarray(mu, dtype=float) @ exp_map(theta * axis)
