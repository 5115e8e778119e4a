import dataclasses
import math

import numpy as np
import pytest
from scipy import integrate as sci_integrate
from scipy import stats

from leocov.analytic import (
    QuadratureSpec,
    Scenario,
    SweepSpec,
    average_rate,
    coverage_probability,
    coverage_upper_bound,
    sweep,
    with_parameter,
)
from leocov.channel import LinkBudget
from leocov.geometry import ConstellationConfig, DomainError, UserLocation

RE = 6_371_000.0
rad = math.radians
CFG = ConstellationConfig(648, 500e3, rad(70), rad(10))
BASE = Scenario(CFG)
RAW = dataclasses.replace(BASE, lb=LinkBudget(unit_mean_gain=False))


def _scipy_coverage(s: Scenario, t_lin: float) -> float:
    """Independent route: noncentral chi-squared tail integrated against the serving density."""
    n = s.resolve_n()
    h = s.cfg.altitude_m
    c = 4 * RE * (RE + h)
    lb = s.lb
    k2 = 2 * lb.rician_k
    # threshold on the raw chi-squared draw; the unit-mean gain is that draw over 2K + 2
    raw_per_gain = (k2 + 2) if lb.unit_mean_gain else 1.0
    snr_unit = lb.tx_power_w / lb.noise_power_w

    def f(r):
        dens = n * (1 - (r * r - h * h) / c) ** (n - 1) * 2 * r / c
        g = t_lin * r**lb.path_loss_exponent / snr_unit * raw_per_gain
        tail = stats.ncx2.sf(g, 2, k2) if k2 > 0 else math.exp(-g / 2)
        return tail * dens

    val, _ = sci_integrate.quad(f, h, s.r_max, epsabs=1e-13, epsrel=1e-11, limit=400)
    return val


def _layer_cake_rate(s: Scenario) -> float:
    """E[log2(1+SNR)] = (1/ln 2) * int_0^inf P(SNR > t) / (1 + t) dt, in u = ln t."""
    f = lambda u: _scipy_coverage(s, math.exp(u)) * math.exp(u) / (1 + math.exp(u))
    val, _ = sci_integrate.quad(f, -40, 25, epsabs=1e-9, limit=400)
    return val / math.log(2)


class TestCoverage:
    def test_reference_values(self):
        # frozen from the scipy route below
        res = coverage_probability(BASE, 10.0)
        assert res.value == pytest.approx(0.9843728394009916, abs=1e-9)
        assert res.converged and res.method == "analytic"
        assert res.n_used == pytest.approx(439.0048441044213, rel=1e-12)
        assert coverage_probability(BASE, 15.0).value == pytest.approx(0.6061707502986787, abs=1e-9)
        assert coverage_probability(BASE, 20.0).value == pytest.approx(0.0013166845831977323, abs=1e-12)

    @pytest.mark.parametrize("t_db", [-10, 10, 14, 17, 20, 25])
    def test_matches_scipy_route(self, t_db):
        got = coverage_probability(BASE, t_db).value
        assert got == pytest.approx(_scipy_coverage(BASE, 10 ** (t_db / 10)), abs=1e-9)

    @pytest.mark.parametrize("t_db", [-10, 10, 30, 38, 40, 45])
    def test_raw_gain_matches_scipy_route(self, t_db):
        got = coverage_probability(RAW, t_db).value
        assert got == pytest.approx(_scipy_coverage(RAW, 10 ** (t_db / 10)), abs=1e-9)

    def test_raw_gain_reference_values(self):
        assert coverage_probability(RAW, 10.0).value == pytest.approx(0.99866971, abs=1e-8)
        assert coverage_probability(RAW, 30.0).value == pytest.approx(0.998657, abs=5e-6)
        assert coverage_probability(RAW, 40.0).value == pytest.approx(0.312, abs=5e-4)
        assert coverage_probability(RAW, 60.0).value == pytest.approx(0.0, abs=1e-12)

    def test_rayleigh_route(self):
        s = dataclasses.replace(BASE, lb=LinkBudget(rician_k=0.0))
        for t_db in (0, 20, 30):
            assert coverage_probability(s, t_db).value == pytest.approx(_scipy_coverage(s, 10 ** (t_db / 10)), abs=1e-8)

    def test_bounded_by_visibility(self):
        ub = coverage_upper_bound(BASE)
        for t_db in np.linspace(-30, 60, 19):
            assert 0.0 <= coverage_probability(BASE, t_db).value <= ub + 1e-12

    def test_very_low_threshold_reaches_bound(self):
        assert coverage_probability(BASE, -200.0).value == pytest.approx(coverage_upper_bound(BASE), abs=1e-10)

    def test_monotone_in_threshold_and_power(self):
        ts = np.linspace(0, 30, 31)
        cov = [coverage_probability(BASE, t).value for t in ts]
        assert np.all(np.diff(cov) <= 1e-12)
        powers = np.geomspace(0.1, 100, 12)
        cov = [coverage_probability(with_parameter(BASE, "tx_power", p), 15.0).value for p in powers]
        assert np.all(np.diff(cov) >= -1e-12)

    def test_n_modes(self):
        actual = Scenario(CFG, n_mode="actual")
        explicit = Scenario(CFG, n_mode=648.0)
        assert actual.resolve_n() == 648.0
        assert coverage_probability(actual, 15.0).value == pytest.approx(coverage_probability(explicit, 15.0).value, rel=1e-14)
        with pytest.raises(DomainError):
            Scenario(CFG, n_mode="bogus")
        with pytest.raises(DomainError):
            Scenario(CFG, n_mode=-3.0)

    def test_upper_bound_value(self):
        s = Scenario(dataclasses.replace(CFG, n_act=120), n_mode=81.0)
        assert coverage_upper_bound(s) == pytest.approx(0.7053242895613928, rel=1e-10)
        zenith = Scenario(dataclasses.replace(CFG, min_elevation_rad=math.pi / 2))
        assert coverage_upper_bound(zenith) == 0.0


class TestRate:
    def test_reference_values(self):
        # frozen from the layer-cake route
        assert average_rate(BASE).value == pytest.approx(5.185245768962789, rel=1e-8)
        rayleigh = dataclasses.replace(BASE, lb=LinkBudget(rician_k=0.0))
        assert average_rate(rayleigh).value == pytest.approx(4.497946450592164, rel=1e-8)
        assert average_rate(RAW).value == pytest.approx(12.787, abs=5e-4)
        raw_rayleigh = dataclasses.replace(BASE, lb=LinkBudget(rician_k=0.0, unit_mean_gain=False))
        assert average_rate(raw_rayleigh).value == pytest.approx(5.4237, abs=5e-4)

    @pytest.mark.parametrize("k,unit", [(0.0, True), (100.0, True), (100.0, False)])
    def test_layer_cake_identity(self, k, unit):
        s = dataclasses.replace(BASE, lb=LinkBudget(rician_k=k, unit_mean_gain=unit))
        assert average_rate(s).value == pytest.approx(_layer_cake_rate(s), rel=1e-6)

    def test_layer_cake_sparse_shell(self):
        s = Scenario(dataclasses.replace(CFG, n_act=120))
        assert average_rate(s).value == pytest.approx(_layer_cake_rate(s), rel=1e-6)

    def test_error_estimate_small(self):
        res = average_rate(BASE)
        assert res.converged
        assert 0 < res.error < 1e-5

    def test_rate_grows_with_power(self):
        lo = average_rate(with_parameter(BASE, "tx_power", 100.0)).value
        hi = average_rate(with_parameter(BASE, "tx_power", 10_000.0)).value
        # a 20 dB power step adds about log2(100) bits at high SNR
        assert hi - lo == pytest.approx(math.log2(100), rel=0.05)


class TestSweep:
    def test_threshold_sweep(self):
        spec = SweepSpec.linspace("threshold_db", -10, 30, 5)
        rows = sweep(BASE, spec)
        assert [r.value for r in rows] == list(spec.values)
        for r in rows:
            assert r.result.value == pytest.approx(coverage_probability(BASE, r.value).value, rel=1e-14)

    def test_failures_stay_in_row(self):
        s = Scenario(CFG, user=UserLocation(rad(60)))
        rows = sweep(s, SweepSpec("inclination", (rad(50), rad(70))))
        assert rows[0].result is None and rows[0].error
        assert rows[1].result is not None and rows[1].error is None

    def test_threads_preserve_order(self):
        spec = SweepSpec.linspace("altitude", 400e3, 1500e3, 6, metric="rate")
        assert [r.result.value for r in sweep(BASE, spec, workers=3)] == [r.result.value for r in sweep(BASE, spec)]

    def test_with_parameter(self):
        assert with_parameter(BASE, "n_act", 100.4).cfg.n_act == 100
        assert with_parameter(BASE, "min_elevation", rad(20)).cfg.min_elevation_rad == rad(20)
        assert with_parameter(BASE, "user_latitude", rad(30)).user.latitude_rad == rad(30)
        assert with_parameter(BASE, "threshold_db", 5.0) is BASE

    def test_spec_validation(self):
        with pytest.raises(DomainError):
            SweepSpec("colour", (1.0, 2.0))
        with pytest.raises(DomainError):
            SweepSpec("altitude", (1.0,))
        with pytest.raises(DomainError):
            SweepSpec("altitude", (1.0, 2.0), metric="latency")
        with pytest.raises(DomainError):
            QuadratureSpec(gain_tail_mass=0.1)
