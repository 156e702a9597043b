"""DQN training step, epsilon-greedy policy and the epsilon schedule."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .nn import AdamState, MlpParams, N_ACTIONS, _backward_batch, adam_step, mlp_forward


@dataclass(frozen=True)
class EpsilonSchedule:
    """Exploration rate as a function of the train-step counter."""

    mode: str = "fixed"  # "fixed" | "linear"
    start: float = 0.1
    end: float = 0.1
    decay_steps: int = 10_000

    def __post_init__(self):
        if self.mode not in ("fixed", "linear"):
            raise ValueError(f"unknown epsilon mode {self.mode!r}")
        for v in (self.start, self.end):
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"epsilon value {v} outside [0, 1]")
        if self.decay_steps < 1:
            raise ValueError("decay_steps must be >= 1")

    def value(self, train_step: int) -> float:
        if self.mode == "fixed":
            return self.start
        frac = min(max(train_step / self.decay_steps, 0.0), 1.0)
        return self.start + (self.end - self.start) * frac


def epsilon_greedy(q_values, epsilon: float, rng: np.random.Generator) -> int:
    """Argmax with probability 1-epsilon (ties break to the lowest index),
    otherwise a uniformly random action."""
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"epsilon {epsilon} outside [0, 1]")
    if epsilon > 0.0 and rng.random() < epsilon:
        return int(rng.integers(0, N_ACTIONS))
    return int(np.argmax(q_values))


def bellman_target(r: float, gamma: float, q_next, done: bool) -> float:
    """r if terminal, else r + gamma * max(q_next)."""
    return float(r) if done else float(r) + gamma * float(np.max(q_next))


def dqn_train_step(online: MlpParams, target_net: MlpParams, opt: AdamState,
                   batch, gamma: float):
    """One Adam step on the mean per-transition loss
    0.5 * (Q(s)[a] - bellman_target)^2, targets from the frozen network.

    Returns (online, opt, loss). For a single-transition batch this is
    bit-identical to mlp_backward followed by adam_step.
    """
    if len(batch) == 0:
        raise ValueError("batch must be non-empty")
    obs = np.array([t.s for t in batch], dtype=float)
    actions = np.array([t.a for t in batch], dtype=int)
    q_next = mlp_forward(target_net, np.array([t.s_next for t in batch]))
    targets = np.array([
        bellman_target(t.r, gamma, q_next[i], t.done) for i, t in enumerate(batch)
    ])
    grads_w, grads_b, loss = _backward_batch(online, obs, actions, targets)
    online, opt = adam_step(opt, online, grads_w, grads_b)
    return online, opt, loss
