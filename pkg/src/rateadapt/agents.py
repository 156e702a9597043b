"""Rate adapters: the DQN and tabular learners plus the Ideal, Minstrel-like
and constant-rate baselines.

Every adapter follows the same two-call protocol: observe(step_result) with
the latest environment feedback, then select_action() for the next window's
MCS. Evaluation mode is purely exploitative: no exploration, no learning.
"""

from __future__ import annotations

import numpy as np

from . import phy
from .dqn import EpsilonSchedule, epsilon_greedy
from .env import StepResult
from .nn import MlpParams, mlp_forward
from .phy import McsTable
from .tabular import QTable

ALGORITHMS = ("dara", "dara_tabular", "ideal", "minstrel_like", "constant")


class RateAdapter:
    """Behavioural contract shared by all adapters."""

    def observe(self, result: StepResult):
        raise NotImplementedError

    def select_action(self) -> int:
        raise NotImplementedError


def ideal_select(snr_db: float, table: McsTable, p_min: float) -> int:
    """Highest MCS whose predicted frame success probability meets p_min;
    falls back to MCS 0 when none qualifies."""
    if not 0.0 < p_min < 1.0:
        raise ValueError(f"p_min {p_min} outside (0, 1)")
    for mcs in reversed(table.entries):
        if phy.frame_success_prob(snr_db, mcs) >= p_min:
            return mcs.index
    return 0


class DaraAgent(RateAdapter):
    """DQN-based adapter: the state is the scaled mean ACK SNR."""

    def __init__(self, params: MlpParams, mode: str = "evaluation",
                 schedule: EpsilonSchedule | None = None,
                 rng: np.random.Generator | None = None):
        if mode not in ("training", "evaluation"):
            raise ValueError(f"unknown mode {mode!r}")
        if mode == "training" and (schedule is None or rng is None):
            raise ValueError("training mode needs an epsilon schedule and an RNG")
        self.params = params
        self.mode = mode
        self.schedule = schedule
        self.rng = rng
        self.train_step = 0
        self._obs = 0.0

    def observe(self, result: StepResult):
        self._obs = result.observation

    def select_action(self) -> int:
        q = mlp_forward(self.params, self._obs)
        if self.mode == "evaluation":
            return int(np.argmax(q))
        return epsilon_greedy(q, self.schedule.value(self.train_step), self.rng)


class TabularDaraAgent(RateAdapter):
    """Same policy shape as DaraAgent but backed by a binned Q-table."""

    def __init__(self, table: QTable, mode: str = "evaluation",
                 schedule: EpsilonSchedule | None = None,
                 rng: np.random.Generator | None = None):
        if mode == "training" and (schedule is None or rng is None):
            raise ValueError("training mode needs an epsilon schedule and an RNG")
        self.table = table
        self.mode = mode
        self.schedule = schedule
        self.rng = rng
        self.train_step = 0
        self._obs = 0.0

    def observe(self, result: StepResult):
        self._obs = result.observation

    def select_action(self) -> int:
        q = self.table.row(self._obs)
        if self.mode == "evaluation":
            return int(np.argmax(q))
        return epsilon_greedy(q, self.schedule.value(self.train_step), self.rng)


class IdealAgent(RateAdapter):
    """Oracle baseline reading the true SNR from the simulator side-channel."""

    def __init__(self, table: McsTable, p_min: float = 0.9):
        if not 0.0 < p_min < 1.0:
            raise ValueError(f"p_min {p_min} outside (0, 1)")
        self.table = table
        self.p_min = p_min
        self._snr = -np.inf

    def observe(self, result: StepResult):
        self._snr = result.info["raw_snr_db"]

    def select_action(self) -> int:
        return ideal_select(self._snr, self.table, self.p_min)


class MinstrelLikeState:
    """EWMA success statistics per MCS, optimistically initialized."""

    def __init__(self, ewma_weight: float = 0.25, probe_prob: float = 0.1):
        if not 0.0 <= ewma_weight <= 1.0:
            raise ValueError("ewma_weight outside [0, 1]")
        if not 0.0 <= probe_prob <= 1.0:
            raise ValueError("probe_prob outside [0, 1]")
        self.ewma = np.ones(phy.N_MCS)
        self.ewma_weight = ewma_weight
        self.probe_prob = probe_prob
        self.attempts = np.zeros(phy.N_MCS, dtype=int)
        self.successes = np.zeros(phy.N_MCS, dtype=int)


def minstrel_like_select(state: MinstrelLikeState, table: McsTable,
                         rng: np.random.Generator) -> int:
    """Probe a uniformly random MCS with probe_prob, else pick the MCS
    maximizing rate * EWMA success probability."""
    if state.probe_prob > 0.0 and rng.random() < state.probe_prob:
        return int(rng.integers(0, phy.N_MCS))
    expected = np.array([m.phy_rate_mbps for m in table]) * state.ewma
    return int(np.argmax(expected))


def minstrel_like_update(state: MinstrelLikeState, mcs: int, fsr: float,
                         window_frames: int = 1) -> MinstrelLikeState:
    """Fold one window's FSR into the chosen MCS's EWMA."""
    if not 0.0 <= fsr <= 1.0:
        raise ValueError(f"fsr {fsr} outside [0, 1]")
    w = state.ewma_weight
    state.ewma[mcs] = (1.0 - w) * state.ewma[mcs] + w * fsr
    state.attempts[mcs] += window_frames
    state.successes[mcs] += round(fsr * window_frames)
    return state


class MinstrelLikeAgent(RateAdapter):
    """Deliberately simplified Minstrel-HT stand-in: EWMA plus uniform
    probing, no retry chains or sample tables."""

    def __init__(self, table: McsTable, rng: np.random.Generator,
                 ewma_weight: float = 0.25, probe_prob: float = 0.1,
                 window_frames: int = 50):
        self.table = table
        self.rng = rng
        self.state = MinstrelLikeState(ewma_weight, probe_prob)
        self.window_frames = window_frames
        self._last_action = None

    def observe(self, result: StepResult):
        if self._last_action is not None:
            minstrel_like_update(
                self.state, self._last_action, result.info["fsr"],
                self.window_frames,
            )

    def select_action(self) -> int:
        self._last_action = minstrel_like_select(self.state, self.table, self.rng)
        return self._last_action


class ConstantAgent(RateAdapter):
    """Control baseline: always the same MCS."""

    def __init__(self, fixed_mcs: int):
        if not 0 <= int(fixed_mcs) < phy.N_MCS:
            raise ValueError(f"fixed_mcs {fixed_mcs} outside [0, 7]")
        self.fixed_mcs = int(fixed_mcs)

    def observe(self, result: StepResult):
        pass

    def select_action(self) -> int:
        return self.fixed_mcs
