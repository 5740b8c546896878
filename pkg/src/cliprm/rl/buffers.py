from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from cliprm.errors import ValidationError


@dataclass
class LabeledTransition:
    state: np.ndarray
    action: object
    reward: float
    next_state: np.ndarray
    episode: int = 0
    t: int = 0
    gt_reward: float | None = None


class UnlabeledBuffer:
    """FIFO of transitions waiting for a reward label."""

    def __init__(self, threshold: int):
        if int(threshold) < 1:
            raise ValidationError("reward batch size must be >= 1")
        self.threshold = int(threshold)
        self._items: deque = deque()

    def append(self, transition):
        self._items.append(transition)

    def __len__(self):
        return len(self._items)

    @property
    def ready(self) -> bool:
        return len(self._items) >= self.threshold

    def peek_all(self) -> list:
        return list(self._items)

    def clear(self):
        self._items.clear()


class ReplayBuffer:
    """Ring buffer of labelled (state, action, reward, next_state) tuples."""

    def __init__(self, capacity, obs_dim, action_dim=None, discrete=True):
        if int(capacity) < 1:
            raise ValidationError("replay capacity must be >= 1")
        self.capacity = int(capacity)
        self.discrete = discrete
        self.states = np.zeros((self.capacity, obs_dim), dtype=np.float32)
        self.next_states = np.zeros((self.capacity, obs_dim), dtype=np.float32)
        if discrete:
            self.actions = np.zeros(self.capacity, dtype=np.int64)
        else:
            self.actions = np.zeros((self.capacity, action_dim), dtype=np.float32)
        self.rewards = np.zeros(self.capacity, dtype=np.float32)
        self.pos = 0
        self.size = 0
        self.total_added = 0

    def __len__(self):
        return self.size

    def add(self, state, action, reward, next_state):
        i = self.pos
        self.states[i] = state
        self.actions[i] = action
        self.rewards[i] = reward
        self.next_states[i] = next_state
        self.pos = (i + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)
        self.total_added += 1

    def extend(self, labeled):
        for tr in labeled:
            self.add(tr.state, tr.action, tr.reward, tr.next_state)

    def sample(self, batch_size, rng: np.random.Generator):
        if self.size == 0:
            raise ValidationError("cannot sample from an empty replay buffer")
        idx = rng.integers(0, self.size, size=batch_size)
        return self.states[idx], self.actions[idx], self.rewards[idx], self.next_states[idx]
