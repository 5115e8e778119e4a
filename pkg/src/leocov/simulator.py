"""Monte Carlo estimation of coverage and rate over explicit constellations.

Each trial draws a fresh constellation realisation and a fresh serving-link
gain, picks the nearest satellite and records its distance and gain. Trials
are split over workers, each with its own counter-based (Philox) substream
spawned from ``(seed, worker index)``; results are concatenated in worker
order, so a fixed ``(seed, workers)`` pair is bit-reproducible.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import channel
from .analytic import MetricResult
from .geometry import (
    ConstellationConfig,
    DomainError,
    EarthModel,
    SatelliteState,
    UserLocation,
    max_slant_range,
    orbit_positions,
)

Z95 = 1.959963984540054
# satellite positions held in memory per chunk of trials
_CHUNK_ELEMENTS = 1 << 21


@dataclass(frozen=True)
class UniformShell:
    """Satellites independently uniform over the whole shell."""


@dataclass(frozen=True)
class RandomInclined:
    """Independent uniform argument of latitude and node angle per satellite."""


@dataclass(frozen=True)
class WalkerDelta:
    """Walker delta pattern ``i: t/p/f`` with ``t = planes * sats_per_plane``."""

    planes: int
    sats_per_plane: int
    phasing: int = 0

    def __post_init__(self):
        if self.planes < 1 or self.sats_per_plane < 1:
            raise DomainError("Walker planes and satellites per plane must be >= 1")
        if not 0 <= self.phasing < self.planes:
            raise DomainError(f"Walker phasing must be in [0, planes), got {self.phasing}")

    @property
    def total(self) -> int:
        return self.planes * self.sats_per_plane

    def angles(self) -> tuple[np.ndarray, np.ndarray]:
        """``(argument_of_latitude, raan)`` for every satellite, plane-major order."""
        p = np.repeat(np.arange(self.planes), self.sats_per_plane)
        s = np.tile(np.arange(self.sats_per_plane), self.planes)
        raan = 2.0 * math.pi * p / self.planes
        u = 2.0 * math.pi * s / self.sats_per_plane + 2.0 * math.pi * self.phasing * p / self.total
        return u, raan


GeneratorKind = UniformShell | RandomInclined | WalkerDelta


@dataclass(frozen=True)
class MonteCarloSpec:
    trials: int = 100_000
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise DomainError(f"trials must be >= 1, got {self.trials}")
        if self.workers < 1:
            raise DomainError(f"workers must be >= 1, got {self.workers}")
        if not 0 <= self.seed < 2**64:
            raise DomainError("seed must be a 64-bit unsigned integer")

    def streams(self) -> list[np.random.Generator]:
        children = np.random.SeedSequence(self.seed).spawn(self.workers)
        return [np.random.Generator(np.random.Philox(c)) for c in children]

    def split(self) -> list[int]:
        base, extra = divmod(self.trials, self.workers)
        return [base + (1 if i < extra else 0) for i in range(self.workers)]


def _check_kind(kind, cfg: ConstellationConfig):
    if isinstance(kind, WalkerDelta) and kind.total != cfg.n_act:
        raise DomainError(
            f"Walker pattern has {kind.total} satellites but the constellation has n_act={cfg.n_act}"
        )
    if not isinstance(kind, (UniformShell, RandomInclined, WalkerDelta)):
        raise DomainError(f"unknown generator kind {kind!r}")


def _uniform_shell(rng: np.random.Generator, shape: tuple, radius: float) -> np.ndarray:
    v = rng.standard_normal(shape + (3,))
    v *= radius / np.linalg.norm(v, axis=-1, keepdims=True)
    return v


def generate_batch(kind, cfg: ConstellationConfig, earth: EarthModel, rng: np.random.Generator, batch: int) -> np.ndarray:
    """``batch`` independent constellation realisations, shape ``(batch, n_act, 3)``.

    Walker patterns are fixed, so each realisation is the pattern turned
    about the polar axis by a uniform angle (equivalent to a uniformly
    placed user longitude).
    """
    _check_kind(kind, cfg)
    radius = cfg.shell_radius(earth)
    shape = (batch, cfg.n_act)
    if isinstance(kind, UniformShell):
        return _uniform_shell(rng, shape, radius)
    if isinstance(kind, RandomInclined):
        u = rng.uniform(0.0, 2.0 * math.pi, shape)
        raan = rng.uniform(0.0, 2.0 * math.pi, shape)
        return orbit_positions(u, raan, cfg.inclination_rad, radius)
    u, raan = kind.angles()
    offset = rng.uniform(0.0, 2.0 * math.pi, (batch, 1))
    return orbit_positions(u[None, :], raan[None, :] - offset, cfg.inclination_rad, radius)


def generate(kind, cfg: ConstellationConfig, earth: EarthModel, rng: np.random.Generator) -> np.ndarray:
    """One constellation realisation as an ``(n_act, 3)`` array of positions."""
    if isinstance(kind, WalkerDelta):
        _check_kind(kind, cfg)
        u, raan = kind.angles()
        return orbit_positions(u, raan, cfg.inclination_rad, cfg.shell_radius(earth))
    return generate_batch(kind, cfg, earth, rng, 1)[0]


@dataclass(frozen=True)
class TrialOutcome:
    serving_distance_m: float | None
    snr_linear: float

    def covered(self, threshold_db: float) -> bool:
        return self.snr_linear > float(channel.db_to_linear(threshold_db))

    @property
    def rate_bits(self) -> float:
        return math.log2(1.0 + self.snr_linear)


def _nearest(sats: np.ndarray, user_pos: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Index of and distance to the nearest satellite along the last-but-one axis.

    All satellites share one shell radius, so the nearest one maximises the
    projection onto the user's position vector.
    """
    proj = sats @ user_pos
    idx = np.argmax(proj, axis=-1)  # first maximum wins ties
    best = np.take_along_axis(sats, idx[..., None, None], axis=-2)[..., 0, :]
    diff = best - user_pos
    return idx, np.sqrt(np.sum(diff * diff, axis=-1))


def run_trial(
    sats,
    user: UserLocation,
    cfg: ConstellationConfig,
    lb: channel.LinkBudget,
    rng: np.random.Generator,
    earth: EarthModel = EarthModel(),
) -> TrialOutcome:
    """Serve the user from its nearest satellite and draw that link's gain."""
    pos = np.array([s.xyz if isinstance(s, SatelliteState) else s for s in sats], dtype=float)
    if pos.size == 0:
        raise DomainError("run_trial needs at least one satellite")
    _, dist = _nearest(pos, user.position(earth))
    r_max = max_slant_range(cfg, earth)
    if dist > r_max:
        return TrialOutcome(None, 0.0)
    gain = channel.sample_gain(lb, rng)
    return TrialOutcome(float(dist), float(channel.snr(lb, gain, dist, r_max)))


@dataclass(frozen=True)
class TrialSet:
    """Per-trial nearest distance and serving gain, independent of the link budget.

    Storing these instead of SNRs lets one set of trials be scored at any
    threshold, power or path-loss exponent (common random numbers); the
    fading law itself must match the one the gains were drawn under.
    """

    nearest_distance_m: np.ndarray
    gain: np.ndarray
    r_max: float
    lb: channel.LinkBudget = field(default_factory=channel.LinkBudget)

    @property
    def trials(self) -> int:
        return int(self.nearest_distance_m.size)

    @property
    def visible(self) -> np.ndarray:
        return self.nearest_distance_m <= self.r_max

    def snr(self, lb: channel.LinkBudget | None = None) -> np.ndarray:
        lb = lb or self.lb
        if (lb.rician_k, lb.unit_mean_gain) != (self.lb.rician_k, self.lb.unit_mean_gain):
            raise DomainError("stored gains were drawn under a different fading law; rerun the simulation")
        return channel.snr(lb, self.gain, self.nearest_distance_m, self.r_max)

    def serving_distances(self) -> np.ndarray:
        return self.nearest_distance_m[self.visible]

    def visible_fraction(self) -> MetricResult:
        return _proportion("visibility", self.visible)

    def coverage(self, threshold_db: float, lb: channel.LinkBudget | None = None) -> MetricResult:
        t = float(channel.db_to_linear(threshold_db))
        return _proportion("coverage", self.snr(lb) > t)

    def rate(self, lb: channel.LinkBudget | None = None) -> MetricResult:
        bits = np.log2(1.0 + self.snr(lb))
        n = bits.size
        sd = float(bits.std(ddof=1)) if n > 1 else 0.0
        return MetricResult("rate", float(bits.mean()), "monte_carlo", error=Z95 * sd / math.sqrt(n), trials=n)


def _proportion(metric: str, hits: np.ndarray) -> MetricResult:
    n = hits.size
    p = float(np.count_nonzero(hits)) / n
    return MetricResult(metric, p, "monte_carlo", error=Z95 * math.sqrt(p * (1.0 - p) / n), trials=n)


def _worker(kind, cfg, earth, lb, user_pos, rng, trials) -> tuple[np.ndarray, np.ndarray]:
    chunk = max(1, _CHUNK_ELEMENTS // cfg.n_act)
    dist = np.empty(trials)
    for start in range(0, trials, chunk):
        b = min(chunk, trials - start)
        sats = generate_batch(kind, cfg, earth, rng, b)
        _, dist[start : start + b] = _nearest(sats, user_pos)
    gain = channel.sample_gain(lb, rng, trials)
    return dist, gain


def simulate(
    kind,
    cfg: ConstellationConfig,
    lb: channel.LinkBudget,
    user: UserLocation,
    mc: MonteCarloSpec,
    earth: EarthModel = EarthModel(),
) -> TrialSet:
    """Run ``mc.trials`` independent trials and keep the raw per-trial draws."""
    _check_kind(kind, cfg)
    user_pos = user.position(earth)
    jobs = list(zip(mc.streams(), mc.split()))
    if mc.workers == 1:
        parts = [_worker(kind, cfg, earth, lb, user_pos, rng, n) for rng, n in jobs]
    else:
        with ThreadPoolExecutor(max_workers=mc.workers) as pool:
            futures = [pool.submit(_worker, kind, cfg, earth, lb, user_pos, rng, n) for rng, n in jobs]
            parts = [f.result() for f in futures]
    dist = np.concatenate([p[0] for p in parts])
    gain = np.concatenate([p[1] for p in parts])
    return TrialSet(dist, gain, max_slant_range(cfg, earth), lb)


def estimate(
    kind,
    cfg: ConstellationConfig,
    lb: channel.LinkBudget,
    user: UserLocation,
    mc: MonteCarloSpec,
    threshold_db: float,
    earth: EarthModel = EarthModel(),
) -> tuple[MetricResult, MetricResult]:
    """Monte Carlo ``(coverage, rate)`` with 95 % normal-approximation half-widths."""
    ts = simulate(kind, cfg, lb, user, mc, earth)
    cov = ts.coverage(threshold_db)
    rate = ts.rate()
    n = float(cfg.n_act)
    return (
        MetricResult(cov.metric, cov.value, cov.method, n, cov.error, True, cov.trials),
        MetricResult(rate.metric, rate.value, rate.method, n, rate.error, True, rate.trials),
    )
