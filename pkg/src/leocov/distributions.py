"""Distance and latitude distributions, and the effective satellite count.

The uniform model scatters ``n`` satellites independently and uniformly over
the shell; ``n`` may be any positive real so that a non-integer effective
count can be plugged in directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import ConstellationConfig, DomainError, EarthModel

# Inclination below which the effective count exceeds the actual count everywhere.
MATCHING_THRESHOLD_INCLINATION_RAD = 0.5 * math.acos(1.0 - 8.0 / math.pi**2)


class InclinationLimitError(DomainError):
    """The satellite density is singular at (or zero beyond) the inclination."""


@dataclass(frozen=True)
class DistanceDistribution:
    cfg: ConstellationConfig
    earth: EarthModel = EarthModel()
    n: float = 1.0

    def __post_init__(self):
        if not self.n > 0:
            raise DomainError(f"satellite count must be positive, got {self.n}")

    @property
    def r_min(self) -> float:
        return self.cfg.altitude_m

    @property
    def r_far(self) -> float:
        """Distance to the antipodal point of the shell."""
        return 2.0 * self.earth.radius_m + self.cfg.altitude_m

    @property
    def cap_scale(self) -> float:
        """``4 r_e (r_e + h)``, the normaliser of the cap-area CDF."""
        re = self.earth.radius_m
        return 4.0 * re * (re + self.cfg.altitude_m)


def single_distance_cdf(d: DistanceDistribution, r):
    """CDF of the distance from the user to one uniformly placed satellite."""
    r = np.asarray(r, dtype=float)
    f = (r * r - d.r_min**2) / d.cap_scale
    return np.clip(f, 0.0, 1.0)[()]


def single_distance_pdf(d: DistanceDistribution, r):
    r = np.asarray(r, dtype=float)
    inside = (r >= d.r_min) & (r <= d.r_far)
    return np.where(inside, 2.0 * r / d.cap_scale, 0.0)[()]


def serving_distance_cdf(d: DistanceDistribution, r0):
    """CDF of the nearest-satellite distance, ``1 - (1 - F_R)^n``."""
    f = np.asarray(single_distance_cdf(d, r0))
    with np.errstate(divide="ignore"):
        out = -np.expm1(d.n * np.log1p(-f))
    return np.where(f >= 1.0, 1.0, out)[()]


def serving_distance_pdf(d: DistanceDistribution, r0):
    """Density of the nearest-satellite distance (per metre).

    ``n (1 - F_R)^(n-1) f_R`` on ``[r_min, 2 r_e + r_min]``, zero elsewhere.
    """
    r0 = np.asarray(r0, dtype=float)
    f = np.asarray(single_distance_cdf(d, r0))
    inside = (r0 >= d.r_min) & (r0 <= d.r_far)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        survival = np.exp((d.n - 1.0) * np.log1p(-f))
        if d.n == 1.0:
            survival = np.ones_like(f)
        out = d.n * survival * 2.0 * r0 / d.cap_scale
    return np.where(inside, out, 0.0)[()]


def satellite_latitude_pdf(inclination_rad: float, latitude_rad):
    """Latitude density of a satellite with uniform argument of latitude.

    Returns ``inf`` exactly at ``|latitude| == inclination`` (integrable
    singularity) and 0 beyond it.
    """
    if not 0 < inclination_rad <= math.pi / 2:
        raise DomainError(f"inclination must be in (0, pi/2], got {inclination_rad}")
    phi = np.asarray(latitude_rad, dtype=float)
    gap = np.cos(2.0 * phi) - math.cos(2.0 * inclination_rad)
    with np.errstate(divide="ignore", invalid="ignore"):
        val = math.sqrt(2.0) / math.pi * np.cos(phi) / np.sqrt(gap)
    out = np.where(np.abs(phi) < inclination_rad, val, 0.0)
    out = np.where(np.abs(phi) == inclination_rad, np.inf, out)
    if inclination_rad == math.pi / 2:
        # polar orbits: latitude is uniform on [-pi/2, pi/2]
        out = np.where(np.abs(phi) <= math.pi / 2, 1.0 / math.pi, 0.0)
    return out[()]


def satellite_latitude_cdf(inclination_rad: float, latitude_rad):
    """Closed-form CDF matching :func:`satellite_latitude_pdf`.

    ``sin(lat) = sin(i) cos(V)`` with ``V`` uniform, so ``sin(lat)/sin(i)``
    follows the arcsine law.
    """
    phi = np.asarray(latitude_rad, dtype=float)
    s = np.clip(np.sin(phi) / math.sin(inclination_rad), -1.0, 1.0)
    return (0.5 + np.arcsin(s) / math.pi)[()]


@dataclass(frozen=True)
class EffectiveCount:
    value: float
    user_latitude_rad: float
    inclination_rad: float

    def __float__(self):
        return self.value

    @property
    def rounded(self) -> int:
        return int(round(self.value))


def effective_satellite_count(n_act: float, inclination_rad: float, user_latitude_rad: float) -> EffectiveCount:
    """Uniform-shell size with the same local density as the inclined shell.

    The latitude density is evaluated at the user's own latitude.

    Raises
    ------
    InclinationLimitError
        When ``|user_latitude_rad| >= inclination_rad``; the density is
        singular on the inclination limit and zero beyond it.
    """
    if not n_act >= 1:
        raise DomainError(f"n_act must be >= 1, got {n_act}")
    if not 0 < inclination_rad <= math.pi / 2:
        raise DomainError(f"inclination must be in (0, pi/2], got {inclination_rad}")
    if abs(user_latitude_rad) >= inclination_rad:
        raise InclinationLimitError(
            f"effective satellite count is unbounded at |latitude| >= inclination "
            f"({math.degrees(abs(user_latitude_rad)):.6g} deg >= {math.degrees(inclination_rad):.6g} deg)"
        )
    gap = math.cos(2.0 * user_latitude_rad) - math.cos(2.0 * inclination_rad)
    value = 2.0 * math.sqrt(2.0) / math.pi / math.sqrt(gap) * n_act
    return EffectiveCount(value, user_latitude_rad, inclination_rad)


def matching_latitudes(inclination_rad: float) -> tuple[float, float] | None:
    """Latitudes where the effective count equals the actual count.

    ``None`` when the inclination is below about 39.54 deg, where the
    effective count exceeds the actual one at every latitude.
    """
    if not 0 < inclination_rad <= math.pi / 2:
        raise DomainError(f"inclination must be in (0, pi/2], got {inclination_rad}")
    arg = 8.0 / math.pi**2 + math.cos(2.0 * inclination_rad)
    if arg > 1.0:
        if inclination_rad >= MATCHING_THRESHOLD_INCLINATION_RAD:
            # rounding at the threshold itself: double root at the equator
            return (-0.0, 0.0)
        return None
    phi = 0.5 * math.acos(arg)
    return (-phi, phi)
