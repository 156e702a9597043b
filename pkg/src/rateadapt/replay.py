"""Fixed-capacity FIFO replay buffer of (s, a, r, s', done) transitions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import RateAdaptError


@dataclass(frozen=True)
class Transition:
    s: float
    a: int
    r: float
    s_next: float
    done: bool


class ReplayBuffer:
    """Ring buffer; once full, pushes overwrite strictly oldest-first."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = int(capacity)
        self._storage = [None] * self.capacity
        self._next = 0
        self.size = 0

    def push(self, transition: Transition):
        self._storage[self._next] = transition
        self._next = (self._next + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def sample(self, batch_size: int, rng: np.random.Generator):
        """batch_size transitions drawn uniformly with replacement."""
        if self.size == 0:
            raise RateAdaptError("cannot sample from an empty replay buffer")
        idx = rng.integers(0, self.size, size=batch_size)
        return [self._storage[i] for i in idx]

    def clear(self):
        self._storage = [None] * self.capacity
        self._next = 0
        self.size = 0

    def __len__(self):
        return self.size

    def contents(self):
        """Current transitions, oldest first (test helper)."""
        if self.size < self.capacity:
            return self._storage[: self.size]
        return self._storage[self._next:] + self._storage[: self._next]
