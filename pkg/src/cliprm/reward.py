"""Reward mathematics on embedding vectors.

Two modes share one model object:

* cosine reward ``(s . g) / (|s| |g|)``;
* goal-baseline regularised reward
  ``1 - 0.5 * || alpha * proj(s) + (1 - alpha) * s - g ||^2`` where ``proj``
  projects onto the affine line through the unit baseline embedding ``b`` and
  the unit goal embedding ``g``. For unit ``s`` and ``alpha = 0`` this is the
  cosine reward, since ``1 - 0.5 * |s - g|^2 = s . g``.

The regularised mix is deliberately not re-normalised.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, replace
from typing import Optional

import numpy as np

from cliprm import kernels
from cliprm.encoders.core import EncoderHandle, Embedding, FrameBatch
from cliprm.errors import ConfigurationError, DegenerateBaselineError, NumericError, ValidationError

DEGENERACY_EPS = 1e-6
UNIT_TOL = 1e-6


@dataclass(frozen=True)
class TaskSpec:
    goal_prompt: str
    baseline_prompt: Optional[str] = None
    alpha: float = 0.0
    context: Optional[str] = None  # carried for completeness; the cosine reward ignores it

    def __post_init__(self):
        if not isinstance(self.goal_prompt, str) or not self.goal_prompt.strip():
            raise ValidationError("goal_prompt must be a non-empty string")
        a = float(self.alpha)
        if not 0.0 <= a <= 1.0:
            raise ValidationError(f"alpha must lie in [0, 1], got {a}")
        object.__setattr__(self, "alpha", a)
        if a > 0 and not self.baseline_prompt:
            raise ValidationError(f"alpha={a} requires a baseline_prompt")

    def to_dict(self) -> dict:
        return asdict(self)

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def _unit(v):
    v = np.asarray(v, dtype=np.float64)
    n = np.linalg.norm(v)
    if n == 0.0 or not np.isfinite(n):
        raise NumericError("cannot normalise a zero or non-finite vector")
    return v / n


@dataclass(frozen=True, eq=False)
class RewardModel:
    goal: np.ndarray
    baseline: Optional[np.ndarray] = None
    alpha: float = 0.0
    direction: Optional[np.ndarray] = None

    def __post_init__(self):
        for name in ("goal", "baseline"):
            v = getattr(self, name)
            if v is None:
                continue
            v = np.asarray(v, dtype=np.float64)
            if abs(np.linalg.norm(v) - 1.0) > UNIT_TOL:
                raise ValidationError(f"{name} embedding must be unit norm")
            v.setflags(write=False)
            object.__setattr__(self, name, v)
        if not 0.0 <= self.alpha <= 1.0:
            raise ValidationError(f"alpha must lie in [0, 1], got {self.alpha}")
        if self.direction is None and self.baseline is not None:
            diff = self.goal - self.baseline
            gap = np.linalg.norm(diff)
            if gap > DEGENERACY_EPS:
                d = diff / gap
                d.setflags(write=False)
                object.__setattr__(self, "direction", d)
        if self.alpha > 0 and self.direction is None:
            raise DegenerateBaselineError(
                "goal and baseline embeddings coincide (|g - b| <= 1e-6); regularisation is undefined"
            )

    @classmethod
    def from_vectors(cls, goal, baseline=None, alpha=0.0) -> "RewardModel":
        """Normalise raw goal/baseline vectors and build the model."""
        return cls(_unit(goal), None if baseline is None else _unit(baseline), float(alpha))

    @property
    def dim(self) -> int:
        return self.goal.shape[0]

    def with_alpha(self, alpha: float) -> "RewardModel":
        return replace(self, alpha=float(alpha))


def build_reward_model(task: TaskSpec, encoder: EncoderHandle) -> RewardModel:
    """Embed goal (and baseline) prompts once and normalise them."""
    prompts = [task.goal_prompt] + ([task.baseline_prompt] if task.baseline_prompt else [])
    raw = encoder.text_array(prompts)
    goal = Embedding(raw[0]).normalize().values
    base = Embedding(raw[1]).normalize().values if len(prompts) > 1 else None
    return RewardModel(goal, base, task.alpha)


def _vec(x):
    return x.values if isinstance(x, Embedding) else np.asarray(x, dtype=np.float64)


def cosine_reward(state_embedding, model: RewardModel) -> float:
    s = _vec(state_embedding)
    if s.shape != model.goal.shape:
        raise ValidationError(f"state embedding has shape {s.shape}, model expects {model.goal.shape}")
    if not np.all(np.isfinite(s)):
        raise NumericError("state embedding contains non-finite entries")
    n = np.linalg.norm(s)
    if n == 0.0:
        raise NumericError("state embedding has zero norm")
    return float(np.clip(s @ model.goal / n, -1.0, 1.0))


def _check_unit(s, model):
    s = _vec(s)
    if s.shape != model.goal.shape:
        raise ValidationError(f"state embedding has shape {s.shape}, model expects {model.goal.shape}")
    if abs(np.linalg.norm(s) - 1.0) > UNIT_TOL:
        raise ValidationError("state embedding must be unit norm (normalise first)")
    return s


def project_onto_goal_line(s, model: RewardModel) -> np.ndarray:
    """Orthogonal projection of ``s`` onto the affine line through b and g."""
    if model.direction is None:
        raise ConfigurationError("model has no baseline direction; projection is undefined")
    s = _vec(s)
    d = model.direction
    return model.baseline + ((s - model.baseline) @ d) * d


def regularized_reward(s, model: RewardModel) -> float:
    s = _check_unit(s, model)
    if model.alpha == 0.0:
        mix = s
    else:
        mix = model.alpha * project_onto_goal_line(s, model) + (1.0 - model.alpha) * s
    r = mix - model.goal
    return float(1.0 - 0.5 * (r @ r))


def rewards_from_embeddings(embeddings: np.ndarray, model: RewardModel) -> np.ndarray:
    """Vectorised ``regularized_reward`` over raw (unnormalised) embedding rows."""
    e = np.asarray(embeddings, dtype=np.float64)
    norms = np.linalg.norm(e, axis=1)
    if np.any(norms == 0.0):
        raise NumericError("zero-norm state embedding in batch")
    units = np.ascontiguousarray(e / norms[:, None])
    base = model.baseline if model.baseline is not None else np.zeros_like(model.goal)
    d = model.direction if model.direction is not None else np.zeros_like(model.goal)
    return kernels.regularized_rewards(units, model.goal, base, d, float(model.alpha))


def batch_rewards(frames, model: RewardModel, encoder: EncoderHandle) -> np.ndarray:
    """Rewards for a batch of rendered frames, in input order."""
    if isinstance(frames, FrameBatch):
        arr = frames.frames
    else:
        arr = np.asarray(frames)
        if arr.dtype == object or arr.ndim != 4:
            arr = FrameBatch.from_frames(list(frames)).frames
    if arr.shape[0] == 0:
        raise ValidationError("frame batch is empty")
    return rewards_from_embeddings(encoder.image_array(arr), model)
