"""Coverage probability and average rate of the uniform-shell model.

Both metrics are integrals over the serving distance ``r0`` in
``[r_min, r_max]`` weighted by the nearest-satellite density. The count ``N``
plugged into that density is resolved from the scenario: the actual count,
the effective count at the user's latitude, or an explicit real number.
"""

from __future__ import annotations

import dataclasses
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import channel
from .distributions import DistanceDistribution, effective_satellite_count, serving_distance_pdf
from .geometry import (
    ConstellationConfig,
    DomainError,
    EarthModel,
    UserLocation,
    max_slant_range,
    visibility_probability,
)
from .quadrature import integrate

N_MODES = ("actual", "effective")

SWEEP_VARIABLES = (
    "threshold_db",
    "tx_power",
    "n_act",
    "altitude",
    "min_elevation",
    "inclination",
    "user_latitude",
)


@dataclass(frozen=True)
class QuadratureSpec:
    rel_tol: float = 1e-8
    abs_tol: float = 1e-12
    max_subdivisions: int = 200
    gain_tail_mass: float = 1e-10

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise DomainError("quadrature tolerances must be positive")
        if self.max_subdivisions < 1:
            raise DomainError("max_subdivisions must be >= 1")
        if not 0 < self.gain_tail_mass <= 1e-4:
            raise DomainError(f"gain tail mass must be in (0, 1e-4], got {self.gain_tail_mass}")


@dataclass(frozen=True)
class MetricResult:
    """A coverage probability or an average rate (bits/s/Hz) with its provenance.

    ``error`` is the quadrature error estimate for analytic results and the
    95 % confidence half-width for Monte Carlo ones.
    """

    metric: str
    value: float
    method: str
    n_used: float | None = None
    error: float = 0.0
    converged: bool = True
    trials: int | None = None

    @property
    def half_width(self) -> float | None:
        return self.error if self.method == "monte_carlo" else None


@dataclass(frozen=True)
class Scenario:
    cfg: ConstellationConfig
    lb: channel.LinkBudget = field(default_factory=channel.LinkBudget)
    user: UserLocation = field(default_factory=UserLocation)
    earth: EarthModel = field(default_factory=EarthModel)
    n_mode: str | float = "effective"

    def __post_init__(self):
        if isinstance(self.n_mode, str):
            if self.n_mode not in N_MODES:
                raise DomainError(f"n_mode must be one of {N_MODES} or a positive number, got {self.n_mode!r}")
        elif not self.n_mode > 0:
            raise DomainError(f"explicit satellite count must be positive, got {self.n_mode}")

    def resolve_n(self) -> float:
        if self.n_mode == "actual":
            return float(self.cfg.n_act)
        if self.n_mode == "effective":
            return effective_satellite_count(
                self.cfg.n_act, self.cfg.inclination_rad, self.user.latitude_rad
            ).value
        return float(self.n_mode)

    def distance_distribution(self) -> DistanceDistribution:
        return DistanceDistribution(self.cfg, self.earth, self.resolve_n())

    @property
    def r_max(self) -> float:
        return max_slant_range(self.cfg, self.earth)


def coverage_upper_bound(s: Scenario) -> float:
    """Probability that at least one satellite is visible, ``1 - (1 - P_V)^N``."""
    pv = visibility_probability(s.cfg, s.earth)
    if pv <= 0.0:
        return 0.0
    return float(-np.expm1(s.resolve_n() * math.log1p(-pv)))


def _report(result, metric: str, n: float, extra_error: float = 0.0) -> MetricResult:
    if not result.converged:
        warnings.warn(
            f"{metric} quadrature did not converge (error estimate {result.error:.3g})",
            RuntimeWarning,
            stacklevel=3,
        )
    return MetricResult(
        metric=metric,
        value=float(result.value),
        method="analytic",
        n_used=n,
        error=float(result.error) + extra_error,
        converged=result.converged,
    )


def coverage_probability(
    s: Scenario, threshold_db: float, q: QuadratureSpec = QuadratureSpec()
) -> MetricResult:
    """P(SNR > T) for the nearest satellite, with ``T`` given in dB."""
    d = s.distance_distribution()
    t_lin = float(channel.db_to_linear(threshold_db))

    def integrand(r0):
        g_needed = channel.gain_threshold(s.lb, t_lin, r0)
        return channel.gain_sf(s.lb, g_needed) * serving_distance_pdf(d, r0)

    res = integrate(integrand, d.r_min, s.r_max, q.rel_tol, q.abs_tol, q.max_subdivisions)
    out = _report(res, "coverage", d.n)
    return dataclasses.replace(out, value=min(1.0, max(0.0, out.value)))


def average_rate(s: Scenario, q: QuadratureSpec = QuadratureSpec()) -> MetricResult:
    """Ergodic rate E[log2(1 + SNR)] in bits/s/Hz.

    The inner gain integral is truncated at the ``1 - gain_tail_mass``
    quantile; the dropped mass contributes to the reported error bound.
    """
    d = s.distance_distribution()
    lb = s.lb
    g_max = channel.gain_quantile_upper(lb, q.gain_tail_mass)
    inner_err = [0.0]

    def inner(r0):
        c = lb.snr_scale * r0 ** (-lb.path_loss_exponent)

        def f(g):
            return np.log1p(c[:, None] * g[None, :]) * channel.gain_pdf(lb, g)[None, :]

        res = integrate(f, 0.0, g_max, q.rel_tol, q.abs_tol, q.max_subdivisions)
        inner_err[0] = max(inner_err[0], float(np.max(res.error)))
        return res.value

    def outer(r0):
        return inner(r0) * serving_distance_pdf(d, r0)

    res = integrate(outer, d.r_min, s.r_max, q.rel_tol, q.abs_tol, q.max_subdivisions)
    ln2 = math.log(2.0)
    log_peak = math.log1p(lb.snr_scale * g_max * 2.0 * d.r_min ** (-lb.path_loss_exponent))
    truncation = q.gain_tail_mass * log_peak
    scaled = dataclasses.replace(res, value=res.value / ln2, error=res.error / ln2)
    return _report(scaled, "rate", d.n, (inner_err[0] + truncation) / ln2)


@dataclass(frozen=True)
class SweepSpec:
    """A one-dimensional sweep in internal units (dB, W, count, m, rad)."""

    variable: str
    values: tuple
    metric: str = "coverage"
    threshold_db: float = 10.0

    def __post_init__(self):
        if self.variable not in SWEEP_VARIABLES:
            raise DomainError(f"unknown sweep variable {self.variable!r}; expected one of {SWEEP_VARIABLES}")
        if self.metric not in ("coverage", "rate"):
            raise DomainError(f"metric must be 'coverage' or 'rate', got {self.metric!r}")
        if len(self.values) < 2:
            raise DomainError("a sweep needs at least two points")
        if not all(math.isfinite(v) for v in self.values):
            raise DomainError("sweep values must be finite")

    @classmethod
    def linspace(cls, variable: str, start: float, stop: float, num: int, **kw) -> "SweepSpec":
        return cls(variable, tuple(float(v) for v in np.linspace(start, stop, num)), **kw)


@dataclass(frozen=True)
class SweepRow:
    variable: str
    value: float
    result: MetricResult | None
    error: str | None = None


def with_parameter(s: Scenario, variable: str, value: float) -> Scenario:
    """Copy of ``s`` with one sweep variable replaced (threshold is not part of it)."""
    if variable == "threshold_db":
        return s
    if variable == "tx_power":
        return dataclasses.replace(s, lb=dataclasses.replace(s.lb, tx_power_w=value))
    if variable == "user_latitude":
        return dataclasses.replace(s, user=UserLocation(value))
    key = {
        "n_act": "n_act",
        "altitude": "altitude_m",
        "min_elevation": "min_elevation_rad",
        "inclination": "inclination_rad",
    }[variable]
    if key == "n_act":
        value = int(round(value))
    return dataclasses.replace(s, cfg=dataclasses.replace(s.cfg, **{key: value}))


def evaluate_point(s: Scenario, spec: SweepSpec, value: float, q: QuadratureSpec = QuadratureSpec()) -> SweepRow:
    try:
        point = with_parameter(s, spec.variable, value)
        if spec.metric == "rate":
            result = average_rate(point, q)
        else:
            t = value if spec.variable == "threshold_db" else spec.threshold_db
            result = coverage_probability(point, t, q)
        return SweepRow(spec.variable, value, result)
    except DomainError as exc:
        return SweepRow(spec.variable, value, None, str(exc))


def sweep(s: Scenario, spec: SweepSpec, q: QuadratureSpec = QuadratureSpec(), workers: int = 1) -> list[SweepRow]:
    """Evaluate ``spec.metric`` at every sweep point; failures are kept in-row."""
    if workers <= 1:
        return [evaluate_point(s, spec, v, q) for v in spec.values]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda v: evaluate_point(s, spec, v, q), spec.values))
