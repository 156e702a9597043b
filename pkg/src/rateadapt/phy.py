"""Radio link model: Friis path loss, thermal noise, SNR and per-MCS frame
success probability.

Everything here is a pure function of its arguments; no state, no RNG.
The frame success probability uses a per-MCS logistic curve
p(snr) = 1 / (1 + exp(-slope * (snr - midpoint))), which is analytically
invertible and keeps the whole PHY abstraction two parameters per rate.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

SPEED_OF_LIGHT = 299_792_458.0  # m/s

#: Distances below this are clamped before the Friis formula to avoid the
#: near-field singularity at d -> 0.
MINIMUM_DISTANCE_M = 0.1

N_MCS = 8

# HT20, long guard interval, single spatial stream.
DEFAULT_PHY_RATES_MBPS = (6.5, 13.0, 19.5, 26.0, 39.0, 52.0, 58.5, 65.0)
# Logistic parameters of the frame success curves; chosen so the switching
# points of an SNR-threshold policy spread over a 0..40 dB sweep.
DEFAULT_PER_MIDPOINTS_DB = (5.0, 8.0, 11.0, 14.0, 18.0, 21.0, 24.0, 26.0)
DEFAULT_PER_SLOPES_PER_DB = (1.0,) * N_MCS


@dataclass(frozen=True)
class ChannelParams:
    """Static radio parameters of the link."""

    frequency_hz: float = 5180e6
    tx_power_dbm: float = 20.0
    bandwidth_hz: float = 20e6
    noise_figure_db: float = 7.0

    def __post_init__(self):
        problems = []
        if not (self.frequency_hz > 0):
            problems.append("frequency_hz must be > 0")
        if not (self.bandwidth_hz > 0):
            problems.append("bandwidth_hz must be > 0")
        if self.noise_figure_db < 0:
            problems.append("noise_figure_db must be >= 0")
        if problems:
            raise ConfigError(problems)


@dataclass(frozen=True)
class McsEntry:
    """One modulation and coding scheme: rate plus its success curve."""

    index: int
    phy_rate_mbps: float
    midpoint_snr_db: float
    slope_per_db: float

    def __post_init__(self):
        if not 0 <= self.index < N_MCS:
            raise ConfigError(f"MCS index {self.index} outside [0, {N_MCS - 1}]")
        if self.slope_per_db <= 0:
            raise ConfigError("slope_per_db must be > 0")


class McsTable:
    """Exactly eight MCS entries, with rate and midpoint increasing in index."""

    def __init__(self, entries):
        entries = sorted(entries, key=lambda e: e.index)
        problems = []
        if len(entries) != N_MCS:
            problems.append(f"expected {N_MCS} MCS entries, got {len(entries)}")
        else:
            if [e.index for e in entries] != list(range(N_MCS)):
                problems.append("MCS indices must be exactly 0..7")
            for lo, hi in zip(entries, entries[1:]):
                if hi.phy_rate_mbps <= lo.phy_rate_mbps:
                    problems.append(
                        f"phy_rate_mbps not strictly increasing at index {hi.index}"
                    )
                if hi.midpoint_snr_db <= lo.midpoint_snr_db:
                    problems.append(
                        f"midpoint_snr_db not strictly increasing at index {hi.index}"
                    )
        if problems:
            raise ConfigError(problems)
        self.entries = tuple(entries)

    def __len__(self):
        return N_MCS

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, index: int) -> McsEntry:
        return self.entries[index]

    @property
    def max_rate_mbps(self) -> float:
        return self.entries[-1].phy_rate_mbps

    @classmethod
    def from_lists(cls, rates_mbps, midpoints_db, slopes_per_db) -> "McsTable":
        return cls(
            McsEntry(i, float(r), float(m), float(s))
            for i, (r, m, s) in enumerate(zip(rates_mbps, midpoints_db, slopes_per_db))
        )

    @classmethod
    def default(cls) -> "McsTable":
        return cls.from_lists(
            DEFAULT_PHY_RATES_MBPS, DEFAULT_PER_MIDPOINTS_DB, DEFAULT_PER_SLOPES_PER_DB
        )


def clamp_distance(distance_m: float) -> float:
    """Clamp a distance to the minimum modelled distance, warning if needed."""
    if not math.isfinite(distance_m) or distance_m <= 0:
        raise ValueError(f"distance must be finite and > 0, got {distance_m}")
    if distance_m < MINIMUM_DISTANCE_M:
        warnings.warn(
            f"distance {distance_m} m below minimum {MINIMUM_DISTANCE_M} m; clamped",
            stacklevel=2,
        )
        return MINIMUM_DISTANCE_M
    return distance_m


def friis_path_loss(distance_m: float, params: ChannelParams) -> float:
    """Free-space path loss in dB: 20*log10(4*pi*d*f/c)."""
    d = clamp_distance(distance_m)
    return 20.0 * math.log10(4.0 * math.pi * d * params.frequency_hz / SPEED_OF_LIGHT)


def noise_power_dbm(params: ChannelParams) -> float:
    """Thermal noise floor plus receiver noise figure, in dBm."""
    return -174.0 + 10.0 * math.log10(params.bandwidth_hz) + params.noise_figure_db


def snr_db(distance_m: float, params: ChannelParams) -> float:
    """Receive SNR in dB at a given distance (deterministic, no fading)."""
    return params.tx_power_dbm - friis_path_loss(distance_m, params) - noise_power_dbm(params)


def frame_success_prob(snr: float, mcs: McsEntry):
    """Probability that one frame at `mcs` succeeds at the given SNR (dB).

    Accepts a scalar or an ndarray of SNR values.
    """
    x = np.asarray(snr, dtype=float)
    with np.errstate(over="ignore"):  # exp overflow saturates to p = 0
        p = 1.0 / (1.0 + np.exp(-mcs.slope_per_db * (x - mcs.midpoint_snr_db)))
    return float(p) if np.isscalar(snr) or p.ndim == 0 else p


def scale_snr(snr: float, lo_db: float, hi_db: float) -> float:
    """Map an SNR in dB to the [0, 1] observation range, clamping outside."""
    if lo_db >= hi_db:
        raise ConfigError(f"SNR scaling bounds require lo < hi, got [{lo_db}, {hi_db}]")
    return min(1.0, max(0.0, (snr - lo_db) / (hi_db - lo_db)))
