import math

import numpy as np
import pytest
from scipy import optimize

from leocov.geometry import (
    ConstellationConfig,
    DomainError,
    EarthModel,
    UserLocation,
    coverage_latitude_limit,
    elevation_angle,
    max_slant_range,
    min_altitude_for_global_coverage,
    satellite_position,
    slant_range,
    threshold_inclination_for_global_coverage,
    visibility_probability,
)

RE = 6_371_000.0
rad = math.radians


def cfg(alt_km=500.0, elev_deg=10.0, inc_deg=70.0, n=648):
    return ConstellationConfig(n, alt_km * 1e3, rad(inc_deg), rad(elev_deg))


def _elevation_at_central_angle(beta, h):
    """Elevation and distance of a shell point at Earth-central angle ``beta`` from the user."""
    u = np.array([RE, 0.0, 0.0])
    s = (RE + h) * np.array([math.cos(beta), 0.0, math.sin(beta)])
    d = s - u
    return math.asin(d @ u / RE / np.linalg.norm(d)), float(np.linalg.norm(d))


def _cap_oracle(h, elev):
    """Triangle oracle: root-find the central angle where the elevation hits the mask."""
    hi = math.acos(RE / (RE + h)) + 1e-12
    beta = optimize.brentq(lambda b: _elevation_at_central_angle(b, h)[0] - elev, 0.0, hi, xtol=1e-15)
    return beta, _elevation_at_central_angle(beta, h)[1]


class TestMaxSlantRange:
    def test_horizon_equals_tangent_line(self):
        tangent = math.sqrt((RE + 500e3) ** 2 - RE**2)
        assert max_slant_range(cfg(elev_deg=0)) == pytest.approx(tangent, rel=1e-12)
        assert max_slant_range(cfg(elev_deg=0)) / 1e3 == pytest.approx(2573.1, abs=0.05)

    def test_zenith_only(self):
        assert max_slant_range(cfg(elev_deg=90)) == pytest.approx(500e3, rel=1e-12)

    def test_ten_degree_mask_matches_triangle_oracle(self):
        _, d = _cap_oracle(500e3, rad(10))
        assert d == pytest.approx(1694567.2211546798, rel=1e-10)
        assert max_slant_range(cfg()) == pytest.approx(d, rel=1e-10)
        assert max_slant_range(cfg()) / 1e3 == pytest.approx(1694.7, abs=0.2)

    @pytest.mark.parametrize("alt_km", [200, 500, 1000, 2000, 10000])
    def test_bounds_over_mask_grid(self, alt_km):
        h = alt_km * 1e3
        tangent = math.sqrt((RE + h) ** 2 - RE**2)
        vals = [max_slant_range(cfg(alt_km, e)) for e in np.linspace(0, 90, 37)]
        assert all(h * (1 - 1e-12) <= v <= tangent * (1 + 1e-12) for v in vals)
        assert np.all(np.diff(vals) < 0)


class TestLatitudeLimit:
    def test_global_coverage_thresholds_quoted_for_500_and_2000_km(self):
        # 500 km with inclination just above 68 deg reaches the pole
        assert math.degrees(coverage_latitude_limit(cfg(500, 0, 68.0))) == pytest.approx(90.0, abs=0.05)
        assert math.degrees(coverage_latitude_limit(cfg(2000, 0, 49.0))) == pytest.approx(90.0, abs=0.6)

    def test_polar_orbit_clamped(self):
        assert coverage_latitude_limit(cfg(inc_deg=90)) == pytest.approx(math.pi / 2)

    def test_zenith_only_mask_limits_to_inclination(self):
        assert coverage_latitude_limit(cfg(elev_deg=90, inc_deg=40)) == pytest.approx(rad(40), abs=1e-6)

    def test_equals_inclination_plus_cap_half_angle(self):
        beta, _ = _cap_oracle(500e3, rad(10))
        assert coverage_latitude_limit(cfg(inc_deg=50)) == pytest.approx(rad(50) + beta, rel=1e-10)


class TestMinAltitude:
    def test_polar(self):
        assert min_altitude_for_global_coverage(rad(90), 0.0) == pytest.approx(0.0, abs=1e-6)

    def test_68_degrees(self):
        assert min_altitude_for_global_coverage(rad(68), 0.0) == pytest.approx(500344.8456, rel=1e-9)

    def test_inclination_below_mask_raises(self):
        with pytest.raises(DomainError):
            min_altitude_for_global_coverage(rad(30), rad(40))

    def test_rounding_below_zero_is_clamped(self):
        # polar orbits need no altitude at any mask; the raw formula may round below zero
        for mask in (0, 10, 30, 60):
            assert min_altitude_for_global_coverage(rad(90), rad(mask)) == pytest.approx(0.0, abs=1e-6)
            assert min_altitude_for_global_coverage(rad(90), rad(mask)) >= 0.0

    def test_inverse_relation(self):
        for inc in (50, 60, 68, 80):
            h = min_altitude_for_global_coverage(rad(inc), rad(5))
            assert threshold_inclination_for_global_coverage(h, rad(5)) == pytest.approx(rad(inc), rel=1e-12)

    def test_limit_reaches_pole_at_min_altitude(self):
        h = min_altitude_for_global_coverage(rad(60), rad(10))
        c = ConstellationConfig(1, h, rad(60), rad(10))
        assert coverage_latitude_limit(c) == pytest.approx(math.pi / 2, abs=1e-9)


class TestVisibilityProbability:
    def test_horizon_cap(self):
        cap = (1 - RE / (RE + 500e3)) / 2
        assert visibility_probability(cfg(elev_deg=0)) == pytest.approx(cap, rel=1e-12)
        assert visibility_probability(cfg(elev_deg=0)) == pytest.approx(0.036385, abs=5e-7)

    def test_zenith_only_is_zero(self):
        assert visibility_probability(cfg(elev_deg=90)) == pytest.approx(0.0, abs=1e-15)

    def test_ten_degree_cap_oracle(self):
        beta, _ = _cap_oracle(500e3, rad(10))
        cap = (1 - math.cos(beta)) / 2
        assert cap == pytest.approx(0.014971728286448549, rel=1e-9)
        assert visibility_probability(cfg()) == pytest.approx(cap, rel=1e-9)
        assert visibility_probability(cfg()) == pytest.approx(0.014970, abs=5e-6)

    def test_monotone_on_grid(self):
        elevs = np.linspace(0, 89, 60)
        alts = np.linspace(200, 3000, 40)
        p_e = [visibility_probability(cfg(500, e)) for e in elevs]
        p_h = [visibility_probability(cfg(a, 10)) for a in alts]
        assert np.all(np.diff(p_e) < 0)
        assert np.all(np.diff(p_h) > 0)


class TestSatellitePosition:
    def test_ascending_quarter_is_equatorial(self):
        for inc in (10, 53, 70, 90):
            s = satellite_position(math.pi / 2, 0.0, cfg(inc_deg=inc))
            assert s.latitude_rad == pytest.approx(0.0, abs=1e-12)

    def test_zero_argument_sits_at_minus_inclination(self):
        s = satellite_position(0.0, 0.0, cfg(inc_deg=70))
        assert math.degrees(s.latitude_rad) == pytest.approx(-70.0, abs=1e-12)

    def test_polar_orbit_maps_argument_to_latitude(self):
        s = satellite_position(math.pi / 4, 0.0, cfg(inc_deg=90))
        assert math.degrees(s.latitude_rad) == pytest.approx(-45.0, abs=1e-10)

    def test_latitude_formula_at_zero_raan(self):
        inc = rad(53)
        for u in np.linspace(-1.5, 1.5, 13):
            s = satellite_position(u, 0.0, cfg(inc_deg=53))
            g = math.atan(-math.cos(u) * math.sin(inc) / math.sqrt(math.cos(u) ** 2 * math.cos(inc) ** 2 + math.sin(u) ** 2))
            assert s.latitude_rad == pytest.approx(g, abs=1e-12)

    def test_on_shell_and_bounded_latitude(self):
        rng = np.random.default_rng(7)
        c = cfg(inc_deg=53)
        from leocov.geometry import orbit_positions

        pos = orbit_positions(rng.uniform(0, 2 * np.pi, 100_000), rng.uniform(0, 2 * np.pi, 100_000),
                              c.inclination_rad, c.shell_radius(EarthModel()))
        r = np.linalg.norm(pos, axis=1)
        np.testing.assert_allclose(r, RE + 500e3, rtol=1e-9)
        lat = np.arcsin(pos[:, 2] / r)
        assert np.max(np.abs(lat)) <= c.inclination_rad + 1e-12


class TestSlantRange:
    def test_zenith_and_antipode(self):
        user = UserLocation(rad(20))
        up = user.position(EarthModel()) / RE
        assert slant_range(user, (RE + 500e3) * up) == pytest.approx(500e3, rel=1e-12)
        assert slant_range(user, -(RE + 500e3) * up) == pytest.approx(2 * RE + 500e3, rel=1e-12)

    def test_satellite_at_mask_elevation_is_at_max_range(self):
        user = UserLocation(0.0)
        u = user.position(EarthModel())
        el = rad(10)
        direction = math.sin(el) * u / RE + math.cos(el) * np.array([0.0, 0.0, 1.0])
        d = optimize.brentq(lambda t: np.linalg.norm(u + t * direction) - (RE + 500e3), 0, 1e8, xtol=1e-6)
        sat = u + d * direction
        assert elevation_angle(user, sat) == pytest.approx(el, abs=1e-12)
        assert slant_range(user, sat) == pytest.approx(max_slant_range(cfg()), rel=1e-9)

    def test_elevation_and_range_definitions_agree(self):
        rng = np.random.default_rng(11)
        n = 100_000
        lat = rng.uniform(-math.pi / 2, math.pi / 2, n)
        alt = rng.uniform(200e3, 3000e3, n)
        mask = rng.uniform(0, math.radians(80), n)
        v = rng.standard_normal((n, 3))
        v /= np.linalg.norm(v, axis=1, keepdims=True)
        up = np.stack([np.cos(lat), np.zeros(n), np.sin(lat)], axis=1)
        sats = v * (RE + alt)[:, None]
        diff = sats - RE * up
        dist = np.linalg.norm(diff, axis=1)
        el = np.arcsin(np.sum(diff * up, axis=1) / dist)
        h = alt / RE
        s = np.sin(mask)
        r_max = RE * (np.sqrt(h * (h + 2) + s * s) - s)
        slack = 1e-9
        violations = np.sum((el >= mask + slack) & (dist > r_max)) + np.sum((el < mask - slack) & (dist <= r_max))
        assert violations == 0
        # the library function agrees on one user
        user = UserLocation(lat[0])
        assert elevation_angle(user, sats[0]) == pytest.approx(el[0], abs=1e-12)


def test_config_validation():
    with pytest.raises(DomainError):
        ConstellationConfig(0, 500e3, rad(70))
    with pytest.raises(DomainError):
        ConstellationConfig(10, -1.0, rad(70))
    with pytest.raises(DomainError):
        ConstellationConfig(10, 500e3, 0.0)
    with pytest.raises(DomainError):
        ConstellationConfig(10, 500e3, rad(70), rad(-1))
    with pytest.raises(DomainError):
        UserLocation(2.0)
    with pytest.raises(DomainError):
        EarthModel(0.0)
