"""JSON configuration: schema, validation with full error lists, defaults
and the config fingerprint stored in checkpoints.

The file has three sections: `agent` (RL hyperparameters and the algorithm
name), `gym` (observation scaling and decision-window parameters) and `sim`
(PHY, traffic, mobility and episode parameters). Key names carry explicit
units (_mhz, _dbm, _s, _bytes) so values cannot silently drift. Unknown keys
are rejected.
"""

from __future__ import annotations

import hashlib
import json
from copy import deepcopy
from importlib import resources

from . import phy
from .agents import ALGORITHMS
from .env import EpisodeConfig, MobilityConfig, TrafficConfig
from .errors import ConfigError
from .phy import ChannelParams, McsTable


def _num(lo=None, hi=None, lo_open=False, hi_open=False):
    def check(v):
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            return "must be a number"
        if lo is not None and (v <= lo if lo_open else v < lo):
            return f"must be {'>' if lo_open else '>='} {lo}"
        if hi is not None and (v >= hi if hi_open else v > hi):
            return f"must be {'<' if hi_open else '<='} {hi}"
        return None
    return check


def _int(lo=None, hi=None):
    base = _num(lo, hi)
    def check(v):
        if isinstance(v, bool) or not isinstance(v, int):
            return "must be an integer"
        return base(v)
    return check


def _bool(v):
    return None if isinstance(v, bool) else "must be true or false"


def _choice(options):
    def check(v):
        if v not in options:
            return f"must be one of {sorted(options)}"
        return None
    return check


def _num_list(length=None, lo=None):
    def check(v):
        if not isinstance(v, list) or not all(
            isinstance(x, (int, float)) and not isinstance(x, bool) for x in v
        ):
            return "must be a list of numbers"
        if length is not None and len(v) != length:
            return f"must have exactly {length} elements"
        if lo is not None and any(x <= lo for x in v):
            return f"elements must be > {lo}"
        return None
    return check


def _int_list_nonempty(v):
    if (not isinstance(v, list) or not v
            or not all(isinstance(x, int) and not isinstance(x, bool) and x >= 1
                       for x in v)):
        return "must be a non-empty list of integers >= 1"
    return None


# Schema: section -> key -> (default, validator).
SCHEMA = {
    "agent": {
        "algorithm": ("dara", _choice(ALGORITHMS)),
        "seed": (1, _int()),
        "episodes": (15, _int(lo=1)),
        "learning_rate": (0.01, _num(lo=0, lo_open=True)),
        "discount": (0.5, _num(lo=0, hi=1)),
        "epsilon_mode": ("fixed", _choice(("fixed", "linear"))),
        "epsilon_start": (0.1, _num(lo=0, hi=1)),
        "epsilon_end": (0.1, _num(lo=0, hi=1)),
        "epsilon_decay_steps": (10_000, _int(lo=1)),
        "batch_size": (64, _int(lo=1)),
        "replay_capacity": (1_000_000, _int(lo=1)),
        "replay_persist_across_episodes": (True, _bool),
        "hidden_layers": ([16, 16, 16], _int_list_nonempty),
        "train_every": (8, _int(lo=1)),
        "warmup": (1000, _int(lo=1)),
        "target_sync_every": (200, _int(lo=1)),
        "checkpoint_every": (5, _int(lo=1)),
        "n_state_bins": (32, _int(lo=1)),
        "ideal_p_min": (0.9, _num(lo=0, hi=1, lo_open=True, hi_open=True)),
        "minstrel_probe_prob": (0.1, _num(lo=0, hi=1)),
        "minstrel_ewma_weight": (0.25, _num(lo=0, hi=1)),
        "constant_mcs": (0, _int(lo=0, hi=7)),
    },
    "gym": {
        "snr_lo_db": (0.0, _num()),
        "snr_hi_db": (40.0, _num()),
        "window_frames": (50, _int(lo=1)),
    },
    "sim": {
        "frequency_mhz": (5180.0, _num(lo=0, lo_open=True)),
        "bandwidth_mhz": (20.0, _num(lo=0, lo_open=True)),
        "tx_power_dbm": (20.0, _num()),
        "noise_figure_db": (7.0, _num(lo=0)),
        "payload_bytes": (1400, _int(lo=1)),
        "overhead_s": (100e-6, _num(lo=0)),
        "start_distance_m": (1.0, _num(lo=phy.MINIMUM_DISTANCE_M)),
        "speed_mps": (20.0, _num(lo=0)),
        "duration_s": (60.0, _num(lo=0, lo_open=True)),
        "log_period_s": (1.0, _num(lo=0, lo_open=True)),
        "phy_rates_mbps": (list(phy.DEFAULT_PHY_RATES_MBPS),
                           _num_list(length=8, lo=0)),
        "per_midpoints_db": (list(phy.DEFAULT_PER_MIDPOINTS_DB),
                             _num_list(length=8)),
        "per_slopes_per_db": (list(phy.DEFAULT_PER_SLOPES_PER_DB),
                              _num_list(length=8, lo=0)),
    },
}

# Keys that may legitimately differ between a training run and a later
# evaluation of its checkpoint; excluded from the fingerprint.
FINGERPRINT_EXCLUDE = {("agent", "seed"), ("agent", "episodes"),
                       ("agent", "checkpoint_every")}


class RootConfig:
    """A fully resolved, validated configuration."""

    def __init__(self, data: dict):
        self.data = data

    def __getitem__(self, section):
        return self.data[section]

    # -- domain object builders -------------------------------------------

    def channel_params(self) -> ChannelParams:
        sim = self.data["sim"]
        return ChannelParams(
            frequency_hz=sim["frequency_mhz"] * 1e6,
            tx_power_dbm=sim["tx_power_dbm"],
            bandwidth_hz=sim["bandwidth_mhz"] * 1e6,
            noise_figure_db=sim["noise_figure_db"],
        )

    def mcs_table(self) -> McsTable:
        sim = self.data["sim"]
        return McsTable.from_lists(
            sim["phy_rates_mbps"], sim["per_midpoints_db"], sim["per_slopes_per_db"]
        )

    def mobility(self) -> MobilityConfig:
        sim = self.data["sim"]
        return MobilityConfig(sim["start_distance_m"], sim["speed_mps"])

    def traffic(self) -> TrafficConfig:
        sim = self.data["sim"]
        return TrafficConfig(sim["payload_bytes"], sim["overhead_s"])

    def episode_config(self) -> EpisodeConfig:
        sim = self.data["sim"]
        return EpisodeConfig(
            sim["duration_s"], self.data["gym"]["window_frames"],
            sim["log_period_s"],
        )

    # -- serialization ------------------------------------------------------

    def to_json(self) -> str:
        return json.dumps(self.data, indent=2, sort_keys=True) + "\n"

    def fingerprint(self) -> str:
        """SHA-256 over the resolved config minus run-length/seed keys, so a
        checkpoint stays usable for evaluation under different seeds."""
        basis = deepcopy(self.data)
        for section, key in FINGERPRINT_EXCLUDE:
            basis[section].pop(key, None)
        canonical = json.dumps(basis, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    def with_overrides(self, **agent_overrides) -> "RootConfig":
        data = deepcopy(self.data)
        for key, value in agent_overrides.items():
            if key not in data["agent"]:
                raise ConfigError([f"agent.{key}: unknown key"])
            data["agent"][key] = value
        return validate_config(json.dumps(data))


def validate_config(raw_json: str) -> RootConfig:
    """Parse, default-fill and range-check a config; raises ConfigError with
    the complete list of violations."""
    try:
        parsed = json.loads(raw_json)
    except json.JSONDecodeError as exc:
        raise ConfigError([f"JSON parse error: {exc}"]) from exc
    if not isinstance(parsed, dict):
        raise ConfigError(["top level must be a JSON object"])

    problems = []
    resolved = {}
    for section in parsed:
        if section not in SCHEMA:
            problems.append(f"{section}: unknown section")
    for section, keys in SCHEMA.items():
        if section not in parsed:
            problems.append(f"{section}: missing section")
            parsed = {**parsed, section: {}}
        given = parsed.get(section, {})
        if not isinstance(given, dict):
            problems.append(f"{section}: must be a JSON object")
            given = {}
        for key in given:
            if key not in keys:
                problems.append(f"{section}.{key}: unknown key")
        out = {}
        for key, (default, validator) in keys.items():
            value = given.get(key, deepcopy(default))
            err = validator(value)
            if err:
                problems.append(f"{section}.{key}: {err} (got {value!r})")
            out[key] = value
        resolved[section] = out

    # Cross-field checks only make sense on well-typed values.
    if not problems:
        agent, gym, sim = resolved["agent"], resolved["gym"], resolved["sim"]
        if gym["snr_lo_db"] >= gym["snr_hi_db"]:
            problems.append("gym.snr_lo_db must be < gym.snr_hi_db")
        if agent["warmup"] < agent["batch_size"]:
            problems.append("agent.warmup must be >= agent.batch_size")
        rates, mids = sim["phy_rates_mbps"], sim["per_midpoints_db"]
        if any(b <= a for a, b in zip(rates, rates[1:])):
            problems.append("sim.phy_rates_mbps must be strictly increasing")
        if any(b <= a for a, b in zip(mids, mids[1:])):
            problems.append("sim.per_midpoints_db must be strictly increasing")

    if problems:
        raise ConfigError(problems)
    return RootConfig(resolved)


def default_config() -> RootConfig:
    """The fully resolved defaults (all three sections present but empty)."""
    return validate_config('{"agent": {}, "gym": {}, "sim": {}}')


def reference_config_text() -> str:
    """The shipped reference config, which documents every default."""
    return resources.files("rateadapt.data").joinpath(
        "reference_config.json"
    ).read_text(encoding="utf-8")
