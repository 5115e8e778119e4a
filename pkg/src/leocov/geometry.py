"""Spherical geometry of the Earth / orbital-shell system.

Everything here works in SI units (metres, radians). The Earth is a perfect
sphere and every satellite sits on one circular shell of radius
``earth.radius_m + cfg.altitude_m``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

EARTH_RADIUS_M = 6_371_000.0


class DomainError(ValueError):
    """Raised when an input lies outside the domain where a formula holds."""


@dataclass(frozen=True)
class EarthModel:
    radius_m: float = EARTH_RADIUS_M

    def __post_init__(self):
        if not self.radius_m > 0:
            raise DomainError(f"Earth radius must be positive, got {self.radius_m}")


@dataclass(frozen=True)
class ConstellationConfig:
    """One orbital shell: satellite count, altitude, inclination, elevation mask."""

    n_act: int
    altitude_m: float
    inclination_rad: float
    min_elevation_rad: float = 0.0

    def __post_init__(self):
        if int(self.n_act) != self.n_act or self.n_act < 1:
            raise DomainError(f"n_act must be a positive integer, got {self.n_act}")
        if not self.altitude_m > 0:
            raise DomainError(f"altitude must be positive, got {self.altitude_m} m")
        if not 0 < self.inclination_rad <= math.pi / 2:
            raise DomainError(
                f"inclination must be in (0, 90] deg, got {math.degrees(self.inclination_rad):.6g} deg"
            )
        if not 0 <= self.min_elevation_rad <= math.pi / 2:
            raise DomainError(
                "minimum elevation must be in [0, 90] deg, "
                f"got {math.degrees(self.min_elevation_rad):.6g} deg"
            )

    def shell_radius(self, earth: EarthModel) -> float:
        return earth.radius_m + self.altitude_m


@dataclass(frozen=True)
class UserLocation:
    latitude_rad: float = 0.0

    def __post_init__(self):
        if abs(self.latitude_rad) > math.pi / 2:
            raise DomainError(f"latitude out of range: {self.latitude_rad} rad")

    def position(self, earth: EarthModel) -> np.ndarray:
        """Cartesian position on the surface, placed at longitude 0."""
        phi = self.latitude_rad
        return earth.radius_m * np.array([math.cos(phi), 0.0, math.sin(phi)])


@dataclass(frozen=True)
class SatelliteState:
    """Satellite position in Earth-centred Cartesian coordinates (metres)."""

    x: float
    y: float
    z: float

    @property
    def xyz(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    @property
    def radius_m(self) -> float:
        return math.sqrt(self.x**2 + self.y**2 + self.z**2)

    @property
    def latitude_rad(self) -> float:
        return math.atan2(self.z, math.hypot(self.x, self.y))

    @property
    def longitude_rad(self) -> float:
        return math.atan2(self.y, self.x)


def max_slant_range(cfg: ConstellationConfig, earth: EarthModel = EarthModel()) -> float:
    """Largest user-satellite distance at which the elevation is still >= the mask.

    Attained when the satellite sits exactly at the minimum elevation angle.
    """
    h = cfg.altitude_m / earth.radius_m
    s = math.sin(cfg.min_elevation_rad)
    return earth.radius_m * (math.sqrt(h * (h + 2.0) + s * s) - s)


def coverage_latitude_limit(cfg: ConstellationConfig, earth: EarthModel = EarthModel()) -> float:
    """Highest |user latitude| that can see any satellite of the shell.

    The inclination plus the Earth-central half-angle of the visibility cap,
    clamped to pi/2.
    """
    re, h = earth.radius_m, cfg.altitude_m
    r_max = max_slant_range(cfg, earth)
    arg = (re * re + re * h + (h * h - r_max * r_max) / 2.0) / (re * (re + h))
    # cosine of a physical angle; only rounding can push it outside [-1, 1]
    assert -1.0 - 1e-12 <= arg <= 1.0 + 1e-12, arg
    limit = cfg.inclination_rad + math.acos(min(1.0, max(-1.0, arg)))
    return min(limit, math.pi / 2)


def min_altitude_for_global_coverage(
    inclination_rad: float, min_elevation_rad: float = 0.0, earth: EarthModel = EarthModel()
) -> float:
    """Smallest shell altitude whose visibility reaches the poles.

    Raises
    ------
    DomainError
        If ``inclination_rad <= min_elevation_rad``: no finite altitude helps.
    """
    if inclination_rad <= min_elevation_rad:
        raise DomainError(
            "no finite altitude gives global coverage when inclination <= minimum elevation "
            f"({math.degrees(inclination_rad):.6g} deg <= {math.degrees(min_elevation_rad):.6g} deg)"
        )
    alt = earth.radius_m * math.cos(min_elevation_rad) / math.sin(inclination_rad - min_elevation_rad)
    return max(0.0, alt - earth.radius_m)


def threshold_inclination_for_global_coverage(
    altitude_m: float, min_elevation_rad: float = 0.0, earth: EarthModel = EarthModel()
) -> float:
    """Inverse of :func:`min_altitude_for_global_coverage` in the inclination."""
    ratio = earth.radius_m * math.cos(min_elevation_rad) / (earth.radius_m + altitude_m)
    return min_elevation_rad + math.asin(min(1.0, ratio))


def visibility_probability(cfg: ConstellationConfig, earth: EarthModel = EarthModel()) -> float:
    """Chance that one uniformly placed satellite is above the elevation mask.

    Ratio of the visible spherical cap to the whole shell area.
    """
    r_max = max_slant_range(cfg, earth)
    p = (cfg.altitude_m - r_max * math.sin(cfg.min_elevation_rad)) / (
        2.0 * (earth.radius_m + cfg.altitude_m)
    )
    return min(1.0, max(0.0, p))


def orbit_positions(argument_of_latitude, raan, inclination_rad: float, shell_radius_m: float) -> np.ndarray:
    """Vectorised circular-orbit positions, shape ``broadcast(U, raan).shape + (3,)``.

    The in-plane point is tilted by the inclination about the y axis (so that
    ``z = -r cos(U) sin(i)``) and then turned about the polar axis by ``raan``.
    """
    u = np.asarray(argument_of_latitude, dtype=float)
    om = np.asarray(raan, dtype=float)
    cu, su = np.cos(u), np.sin(u)
    co, so = np.cos(om), np.sin(om)
    ci, si = math.cos(inclination_rad), math.sin(inclination_rad)
    xp = cu * ci
    out = np.empty(np.broadcast_shapes(u.shape, om.shape) + (3,))
    out[..., 0] = shell_radius_m * (xp * co - su * so)
    out[..., 1] = shell_radius_m * (xp * so + su * co)
    out[..., 2] = -shell_radius_m * cu * si
    return out


def satellite_position(
    argument_of_latitude_rad: float,
    raan_rad: float,
    cfg: ConstellationConfig,
    earth: EarthModel = EarthModel(),
) -> SatelliteState:
    x, y, z = orbit_positions(argument_of_latitude_rad, raan_rad, cfg.inclination_rad, cfg.shell_radius(earth))
    return SatelliteState(float(x), float(y), float(z))


def _as_xyz(sat) -> np.ndarray:
    if isinstance(sat, SatelliteState):
        return sat.xyz
    return np.asarray(sat, dtype=float)


def slant_range(user: UserLocation, sat, earth: EarthModel = EarthModel()):
    """Straight-line distance from the user to one or many satellites.

    ``sat`` is a :class:`SatelliteState` or an array whose last axis is xyz.
    """
    d = _as_xyz(sat) - user.position(earth)
    return np.sqrt(np.sum(d * d, axis=-1))


def elevation_angle(user: UserLocation, sat, earth: EarthModel = EarthModel()):
    """Elevation of a satellite above the user's local horizon plane (radians)."""
    u = user.position(earth)
    d = _as_xyz(sat) - u
    dist = np.sqrt(np.sum(d * d, axis=-1))
    sin_el = np.sum(d * (u / earth.radius_m), axis=-1) / dist
    return np.arcsin(np.clip(sin_el, -1.0, 1.0))
