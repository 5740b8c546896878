"""Reward as a function of one swept state parameter, for several alphas."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from cliprm.encoders.core import EncoderHandle
from cliprm.envs.base import StateSweep
from cliprm.errors import CapabilityError, ValidationError
from cliprm.reward import RewardModel, TaskSpec, build_reward_model, rewards_from_embeddings


def alpha_label(a: float) -> str:
    return f"alpha={a:g}"


@dataclass
class LandscapeTable:
    parameter_name: str
    values: np.ndarray
    alphas: tuple
    rewards: np.ndarray  # (len(values), len(alphas))
    env_id: str = ""
    task_hash: str = ""

    def __post_init__(self):
        if self.rewards.shape != (len(self.values), len(self.alphas)):
            raise ValidationError("landscape table shape does not match values x alphas")

    def column(self, alpha) -> np.ndarray:
        for j, a in enumerate(self.alphas):
            if np.isclose(a, alpha):
                return self.rewards[:, j]
        raise KeyError(alpha)

    def argmax(self, alpha=None) -> float:
        col = self.rewards[:, 0] if alpha is None else self.column(alpha)
        return float(self.values[int(np.argmax(col))])

    def header(self):
        return [self.parameter_name] + [alpha_label(a) for a in self.alphas] + ["task_hash"]

    def to_csv(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(self.header())
            for v, row in zip(self.values, self.rewards):
                w.writerow([repr(float(v))] + [repr(float(x)) for x in row] + [self.task_hash])
        return path

    @classmethod
    def from_csv(cls, path, env_id="") -> "LandscapeTable":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        head, body = rows[0], rows[1:]
        alphas = tuple(float(h.split("=", 1)[1]) for h in head[1:-1])
        vals = np.array([float(r[0]) for r in body])
        rew = np.array([[float(x) for x in r[1:-1]] for r in body]).reshape(len(body), len(alphas))
        return cls(head[0], vals, alphas, rew, env_id, body[0][-1] if body else "")

    def plot(self, path) -> Path:
        try:
            import matplotlib

            matplotlib.use("Agg")
            import matplotlib.pyplot as plt
        except ImportError as exc:
            raise CapabilityError("plotting needs matplotlib (pip install artifact[plot])") from exc
        fig, ax = plt.subplots(figsize=(5, 3.5))
        cmap = plt.get_cmap("viridis")
        for j, a in enumerate(self.alphas):
            ax.plot(self.values, self.rewards[:, j], color=cmap(j / max(1, len(self.alphas) - 1)), label=alpha_label(a))
        ax.set_xlabel(self.parameter_name)
        ax.set_ylabel("reward")
        ax.legend(fontsize=7)
        fig.tight_layout()
        path = Path(path)
        fig.savefig(path, dpi=120)
        plt.close(fig)
        return path


def reward_landscape(sweep: StateSweep, task: TaskSpec, encoder: EncoderHandle, alphas, env_id="") -> LandscapeTable:
    alphas = tuple(float(a) for a in alphas)
    if not alphas:
        raise ValidationError("alphas must not be empty")
    if any(not 0.0 <= a <= 1.0 for a in alphas):
        raise ValidationError("alphas must lie in [0, 1]")
    if any(a > 0 for a in alphas) and not task.baseline_prompt:
        raise ValidationError("alpha > 0 requires a baseline prompt")
    base_model: RewardModel = build_reward_model(TaskSpec(task.goal_prompt, task.baseline_prompt, 0.0, task.context), encoder)
    emb = encoder.image_array(sweep.frames)
    cols = [rewards_from_embeddings(emb, base_model.with_alpha(a)) for a in alphas]
    return LandscapeTable(sweep.parameter_name, sweep.values.copy(), alphas, np.stack(cols, axis=1), env_id, task.digest())
