from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from cliprm.errors import CapabilityError, ValidationError


@dataclass(frozen=True)
class ActionSpace:
    kind: str  # "discrete" or "box"
    n: int = 0
    low: tuple = ()
    high: tuple = ()

    @property
    def discrete(self) -> bool:
        return self.kind == "discrete"

    @property
    def dim(self) -> int:
        return self.n if self.discrete else len(self.low)

    def sample(self, rng: np.random.Generator):
        if self.discrete:
            return int(rng.integers(self.n))
        return rng.uniform(np.asarray(self.low), np.asarray(self.high))

    def to_dict(self) -> dict:
        return {"kind": self.kind, "n": self.n, "low": list(self.low), "high": list(self.high)}


@dataclass
class Transition:
    state: np.ndarray
    action: object
    next_state: np.ndarray
    frame: Optional[np.ndarray] = None
    gt_reward: Optional[float] = None
    episode: int = 0
    t: int = 0


@dataclass
class StateSweep:
    parameter_name: str
    values: np.ndarray
    frames: np.ndarray  # (count, H, W, 3) uint8
    states: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if len(v) != len(self.frames):
            raise ValidationError("one frame per sweep value is required")
        if len(v) > 1:
            d = np.diff(v)
            if not (np.all(d > 0) or np.all(d < 0)):
                raise ValidationError("sweep values must be strictly monotone")
        self.values = v


class EnvAdapter:
    """Common surface of the environment adapters.

    Episodes end only on the time limit: ``step`` reports ``truncated=True``
    exactly on the ``episode_length``-th call after ``reset``.
    """

    env_id: str = ""
    action_space: ActionSpace
    episode_length: int = 200
    render_size: tuple = (0, 0)  # (width, height)
    has_ground_truth: bool = False
    sweep_parameters: tuple = ()

    def __init__(self, episode_length=None, seed=None):
        if episode_length is not None:
            if int(episode_length) <= 0:
                raise ValidationError("episode_length must be positive")
            self.episode_length = int(episode_length)
        self.rng = np.random.default_rng(seed)
        self.state = None
        self.t = 0

    # subclasses implement these
    def initial_state(self, rng) -> np.ndarray:
        raise NotImplementedError

    def dynamics(self, state, action) -> np.ndarray:
        raise NotImplementedError

    def render(self, state) -> np.ndarray:
        raise NotImplementedError

    def state_for(self, parameter: str, value: float) -> np.ndarray:
        raise ValidationError(f"{self.env_id} does not support sweeping {parameter!r}")

    def goal_label(self, state) -> bool:
        raise CapabilityError(f"{self.env_id} has no ground-truth goal predicate; use human labels")

    def gt_reward(self, state) -> Optional[float]:
        return None

    @property
    def obs_dim(self) -> int:
        return int(np.asarray(self.state if self.state is not None else self.initial_state(np.random.default_rng(0))).size)

    def reset(self, seed=None) -> np.ndarray:
        if seed is not None:
            self.rng = np.random.default_rng(seed)
        self.state = np.asarray(self.initial_state(self.rng), dtype=np.float64)
        self.t = 0
        return self.state.copy()

    def step(self, action):
        """Advance one step; returns ``(next_state, gt_reward, truncated)``."""
        if self.state is None:
            raise ValidationError("call reset() before step()")
        if self.t >= self.episode_length:
            raise ValidationError("episode is over; call reset()")
        self.state = np.asarray(self.dynamics(self.state, action), dtype=np.float64)
        self.t += 1
        return self.state.copy(), self.gt_reward(self.state), self.t >= self.episode_length

    def sweep_states(self, parameter, lo, hi, count) -> StateSweep:
        if int(count) != count or count < 1:
            raise ValidationError(f"sweep count must be a positive integer, got {count}")
        if parameter not in self.sweep_parameters:
            raise ValidationError(
                f"{self.env_id} cannot sweep {parameter!r}; supported: {', '.join(self.sweep_parameters) or 'none'}"
            )
        if count > 1 and not lo < hi:
            raise ValidationError("sweep range needs lo < hi")
        values = np.linspace(lo, hi, int(count))
        states = np.stack([self.state_for(parameter, v) for v in values])
        frames = np.stack([self.render(s) for s in states])
        return StateSweep(parameter, values, frames, states)

    def close(self):
        pass
