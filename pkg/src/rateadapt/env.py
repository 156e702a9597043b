"""Discrete-event simulation of one saturated UDP link with a receding
receiver, exposed through a gym-style reset/step interface.

One step simulates a window of `window_frames` frame attempts at the chosen
MCS. Frame airtime is payload time plus a fixed overhead constant that lumps
preamble, MAC header, SIFS, ACK and DIFS together; there are no
retransmissions, so throughput is a pure function of the success count and
the airtime. The receiver moves away at constant speed while the window
plays out, so per-frame success probabilities are evaluated at each frame's
ACK instant.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import phy
from .errors import ConfigError, EpisodeEndedError
from .phy import ChannelParams, McsEntry, McsTable


@dataclass(frozen=True)
class MobilityConfig:
    start_distance_m: float = 1.0
    speed_mps: float = 20.0

    def __post_init__(self):
        problems = []
        if self.start_distance_m < phy.MINIMUM_DISTANCE_M:
            problems.append(
                f"start_distance_m must be >= {phy.MINIMUM_DISTANCE_M}"
            )
        if self.speed_mps < 0:
            problems.append("speed_mps must be >= 0")
        if problems:
            raise ConfigError(problems)

    def position_at(self, t: float) -> float:
        """Receiver distance from the stationary sender at time t."""
        if t < 0:
            raise ValueError(f"time must be >= 0, got {t}")
        return self.start_distance_m + self.speed_mps * t


@dataclass(frozen=True)
class TrafficConfig:
    payload_bytes: int = 1400
    overhead_s: float = 100e-6

    def __post_init__(self):
        problems = []
        if self.payload_bytes <= 0:
            problems.append("payload_bytes must be > 0")
        if self.overhead_s < 0:
            problems.append("overhead_s must be >= 0")
        if problems:
            raise ConfigError(problems)

    @property
    def payload_bits(self) -> int:
        return self.payload_bytes * 8


@dataclass(frozen=True)
class EpisodeConfig:
    duration_s: float = 60.0
    window_frames: int = 50
    log_period_s: float = 1.0

    def __post_init__(self):
        problems = []
        if self.duration_s <= 0:
            problems.append("duration_s must be > 0")
        if self.window_frames < 1:
            problems.append("window_frames must be >= 1")
        if self.log_period_s <= 0:
            problems.append("log_period_s must be > 0")
        if problems:
            raise ConfigError(problems)


@dataclass(frozen=True)
class StepResult:
    """One environment transition as seen by the agent."""

    observation: float
    reward: float
    done: bool
    info: dict


@dataclass
class EpisodeLog:
    """Periodic records of time, node positions and link throughput."""

    records: list = field(default_factory=list)

    def append_tick(self, now: float, tx_pos_m: float, rx_pos_m: float,
                    throughput_mbps: float):
        if self.records and now <= self.records[-1]["time_s"]:
            raise ValueError("log timestamps must be strictly increasing")
        self.records.append({
            "time_s": now,
            "tx_pos_m": tx_pos_m,
            "rx_pos_m": rx_pos_m,
            "throughput_mbps": throughput_mbps,
        })


def frame_airtime(mcs: McsEntry, traffic: TrafficConfig) -> float:
    """Seconds one frame occupies the channel, payload plus fixed overhead."""
    return traffic.payload_bits / (mcs.phy_rate_mbps * 1e6) + traffic.overhead_s


def dara_reward(fsr: float, mcs: McsEntry, table: McsTable) -> float:
    """Reward favouring the highest MCS that still succeeds: FSR weighted by
    the chosen rate relative to the top rate, so it lives in [0, 1]."""
    return fsr * mcs.phy_rate_mbps / table.max_rate_mbps


def rng_streams(seed: int, episode: int = 0):
    """Two independent generators derived from (seed, episode): one for the
    environment's Bernoulli draws, one for the agent (exploration, init,
    replay sampling). Keeping them separate means agent configuration changes
    never perturb the channel randomness."""
    env_ss, agent_ss = np.random.SeedSequence([int(seed), int(episode)]).spawn(2)
    return np.random.default_rng(env_ss), np.random.default_rng(agent_ss)


class LinkSimEnv:
    """Single saturated UDP link, one decision per window of frames.

    The observation is the window's mean ACK SNR scaled to [0, 1]; windows
    with zero successes carry the previous observation forward (there are no
    ACKs to measure). `info` carries FSR, throughput, the raw SNR at the
    current distance, distance and simulation time for logging and for the
    oracle baselines.
    """

    INITIAL_MCS = 0

    def __init__(self, channel: ChannelParams, table: McsTable,
                 mobility: MobilityConfig, traffic: TrafficConfig,
                 episode: EpisodeConfig, snr_lo_db: float = 0.0,
                 snr_hi_db: float = 40.0):
        if snr_lo_db >= snr_hi_db:
            raise ConfigError("snr_lo_db must be < snr_hi_db")
        self.channel = channel
        self.table = table
        self.mobility = mobility
        self.traffic = traffic
        self.episode = episode
        self.snr_lo_db = snr_lo_db
        self.snr_hi_db = snr_hi_db
        self._rng = None
        self._done = True

    # -- lifecycle ---------------------------------------------------------

    def reset(self, seed: int, episode: int = 0) -> StepResult:
        """Start a new episode; returns the initial observation.

        The observation comes from a probe window at the initial MCS run with
        the clock frozen at t=0, so the episode proper still starts at the
        configured distance.
        """
        self._rng = rng_streams(seed, episode)[0]
        self.clock = 0.0
        self._done = False
        self.log = EpisodeLog()
        self._next_tick = self.episode.log_period_s
        self._bits_since_tick = 0.0
        self._time_since_tick = 0.0
        self.total_bits = 0.0

        d0 = self.mobility.start_distance_m
        raw_snr = phy.snr_db(d0, self.channel)
        mcs = self.table[self.INITIAL_MCS]
        p = phy.frame_success_prob(raw_snr, mcs)
        draws = self._rng.random(self.episode.window_frames) < p
        fsr = float(np.count_nonzero(draws)) / self.episode.window_frames
        self._last_observation = phy.scale_snr(raw_snr, self.snr_lo_db, self.snr_hi_db)
        return StepResult(
            observation=self._last_observation,
            reward=0.0,
            done=False,
            info={
                "fsr": fsr,
                "throughput_mbps": 0.0,
                "raw_snr_db": raw_snr,
                "distance_m": d0,
                "sim_time_s": 0.0,
            },
        )

    def step(self, action: int) -> StepResult:
        """Simulate one window of frames at MCS `action`."""
        if self._rng is None:
            raise RuntimeError("step() before reset()")
        if self._done:
            raise EpisodeEndedError("episode is over; call reset()")
        if not isinstance(action, (int, np.integer)) or not 0 <= action < phy.N_MCS:
            raise ValueError(f"action must be an MCS index in [0, 7], got {action!r}")

        mcs = self.table[int(action)]
        w = self.episode.window_frames
        dt = frame_airtime(mcs, self.traffic)

        # ACK instants of the window's frames; the receiver keeps moving.
        ack_times = self.clock + dt * np.arange(1, w + 1)
        distances = self.mobility.start_distance_m + self.mobility.speed_mps * ack_times
        snrs = np.array([phy.snr_db(d, self.channel) for d in distances])
        p = phy.frame_success_prob(snrs, mcs)
        successes = self._rng.random(w) < p

        n_ok = int(np.count_nonzero(successes))
        fsr = n_ok / w
        window_duration = w * dt
        bits_ok = n_ok * self.traffic.payload_bits
        throughput_mbps = bits_ok / window_duration / 1e6

        if n_ok > 0:
            mean_ack_snr = float(np.mean(snrs[successes]))
            observation = phy.scale_snr(mean_ack_snr, self.snr_lo_db, self.snr_hi_db)
            self._last_observation = observation
        else:
            observation = self._last_observation

        self.clock += window_duration
        self.total_bits += bits_ok
        self._bits_since_tick += bits_ok
        self._time_since_tick += window_duration
        self._done = self.clock >= self.episode.duration_s
        self._advance_log()

        distance_now = self.mobility.position_at(self.clock)
        reward = dara_reward(fsr, mcs, self.table)
        return StepResult(
            observation=observation,
            reward=reward,
            done=self._done,
            info={
                "fsr": fsr,
                "throughput_mbps": throughput_mbps,
                "raw_snr_db": phy.snr_db(distance_now, self.channel),
                "distance_m": distance_now,
                "sim_time_s": self.clock,
            },
        )

    # -- logging -----------------------------------------------------------

    def _emit_record(self, now: float):
        period = now - (self.log.records[-1]["time_s"] if self.log.records else 0.0)
        thpt = self._bits_since_tick / period / 1e6 if period > 0 else 0.0
        self.log.append_tick(
            now,
            tx_pos_m=0.0,
            rx_pos_m=self.mobility.position_at(now),
            throughput_mbps=thpt,
        )
        self._bits_since_tick = 0.0
        self._time_since_tick = 0.0

    def _advance_log(self):
        # Regular ticks strictly before the episode end; the final record is
        # emitted at the actual end time and may cover a partial period.
        while (self._next_tick <= self.clock
               and self._next_tick < self.episode.duration_s):
            # Windows rarely end exactly on a tick; attribute a window's bits
            # to the tick at or after its end.
            self._emit_record(self._next_tick)
            self._next_tick += self.episode.log_period_s
        if self._done and self.clock > (self.log.records[-1]["time_s"]
                                        if self.log.records else 0.0):
            self._emit_record(self.clock)

    @property
    def done(self) -> bool:
        return self._done

    @property
    def mean_throughput_mbps(self) -> float:
        """Payload bits delivered over elapsed simulated time, in Mbit/s."""
        return self.total_bits / self.clock / 1e6 if self.clock > 0 else 0.0
