"""Link budget, SNR formation and the squared-Rician channel gain.

The raw gain ``X`` follows the noncentral chi-squared law with two degrees
of freedom and noncentrality ``2K``:

    F_X(x) = 1 - Q_1(sqrt(2K), sqrt(x)),
    f_X(x) = exp(-(x + 2K)/2) I0(sqrt(2 K x)) / 2,

so ``E[X] = 2K + 2``. By default the gain entering the SNR is ``G = X / (2K + 2)``
(unit mean); ``unit_mean_gain=False`` uses ``X`` itself. Path loss uses
distances in metres.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import DomainError
from .special import bessel_i0e, marcum_q1, marcum_q_complement


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def watts_to_dbm(watts: float) -> float:
    return 10.0 * math.log10(watts) + 30.0


def db_to_linear(db):
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0)


@dataclass(frozen=True)
class LinkBudget:
    tx_power_w: float = 10.0
    noise_power_w: float = dbm_to_watts(-93.0)
    path_loss_exponent: float = 2.0
    rician_k: float = 100.0
    unit_mean_gain: bool = True

    def __post_init__(self):
        if not self.tx_power_w > 0:
            raise DomainError(f"transmit power must be positive, got {self.tx_power_w} W")
        if not self.noise_power_w > 0:
            raise DomainError(f"noise power must be positive, got {self.noise_power_w} W")
        if not self.path_loss_exponent >= 2:
            raise DomainError(f"path-loss exponent must be >= 2, got {self.path_loss_exponent}")
        if not self.rician_k >= 0:
            raise DomainError(f"Rician K must be >= 0, got {self.rician_k}")

    @classmethod
    def from_dbm(cls, tx_power_w: float = 10.0, noise_dbm: float = -93.0, **kw) -> "LinkBudget":
        return cls(tx_power_w=tx_power_w, noise_power_w=dbm_to_watts(noise_dbm), **kw)

    @property
    def gain_scale(self) -> float:
        """Factor applied to the raw chi-squared draw to form the gain."""
        return 1.0 / (2.0 * self.rician_k + 2.0) if self.unit_mean_gain else 1.0

    @property
    def gain_mean(self) -> float:
        return (2.0 * self.rician_k + 2.0) * self.gain_scale

    @property
    def snr_scale(self) -> float:
        """Multiplier turning ``gain * r**-alpha`` into SNR."""
        return self.tx_power_w / self.noise_power_w


def snr(lb: LinkBudget, gain, distance, r_max: float):
    """Received SNR; exactly 0 when the satellite is farther than ``r_max``."""
    gain = np.asarray(gain, dtype=float)
    distance = np.asarray(distance, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        val = lb.snr_scale * gain * distance ** (-lb.path_loss_exponent)
    return np.where(distance <= r_max, val, 0.0)[()]


def gain_threshold(lb: LinkBudget, snr_threshold, distance):
    """Gain needed at ``distance`` for the SNR to reach ``snr_threshold`` (linear)."""
    return np.asarray(snr_threshold) * np.asarray(distance) ** lb.path_loss_exponent / lb.snr_scale


def _raw(lb: LinkBudget, g) -> np.ndarray:
    return np.maximum(np.asarray(g, dtype=float), 0.0) / lb.gain_scale


def gain_cdf(lb: LinkBudget, g):
    return marcum_q_complement(1, math.sqrt(2.0 * lb.rician_k), np.sqrt(_raw(lb, g)))


def gain_sf(lb: LinkBudget, g):
    """``1 - gain_cdf``, computed directly so small tails keep their digits."""
    return marcum_q1(math.sqrt(2.0 * lb.rician_k), np.sqrt(_raw(lb, g)))


def gain_pdf(lb: LinkBudget, g):
    g = np.asarray(g, dtype=float)
    x = _raw(lb, g)
    k2 = 2.0 * lb.rician_k
    # exp(-(x + 2K)/2) I0(sqrt(2Kx)) = exp(-(sqrt(x) - sqrt(2K))^2 / 2) * i0e(sqrt(2Kx))
    expo = -0.5 * (np.sqrt(x) - math.sqrt(k2)) ** 2
    dens = 0.5 * np.exp(expo) * bessel_i0e(np.sqrt(k2 * x)) / lb.gain_scale
    return np.where(g >= 0, dens, 0.0)[()]


def gain_quantile_upper(lb: LinkBudget, tail_mass: float) -> float:
    """Gain ``g`` with ``P(G > g) = tail_mass``, by bisection on :func:`gain_sf`."""
    if not 0 < tail_mass < 1:
        raise DomainError(f"tail mass must be in (0, 1), got {tail_mass}")
    lo, hi = 0.0, max(1.0, lb.gain_mean)
    while gain_sf(lb, hi) > tail_mass:
        lo, hi = hi, 2.0 * hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if gain_sf(lb, mid) > tail_mass:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-12 * hi:
            break
    return hi


def sample_gain(lb: LinkBudget, rng: np.random.Generator, size=None):
    """Draw ``(Z1 + sqrt(2K))**2 + Z2**2`` with independent standard normals, then scale."""
    z = rng.standard_normal((2,) if size is None else (2,) + tuple(np.atleast_1d(size)))
    out = ((z[0] + math.sqrt(2.0 * lb.rician_k)) ** 2 + z[1] ** 2) * lb.gain_scale
    return float(out) if size is None else out
