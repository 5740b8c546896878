"""Off-policy training with deferred, batched reward labelling.

Environment transitions wait in an :class:`UnlabeledBuffer`. Once it holds at
least ``reward_batch`` entries, *every* waiting transition is rendered-frame
scored by the reward model in one batch and moved to the replay buffer. Only
labelled transitions are ever sampled for gradient updates, and a transition's
reward is fixed at label time.
"""
from __future__ import annotations

import csv
import json
import logging
import math
from collections import deque
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Optional

from PIL import Image

import numpy as np
import torch

from cliprm.envs.base import EnvAdapter, Transition
from cliprm.errors import ConfigurationError, ValidationError
from cliprm.reward import RewardModel, batch_rewards
from cliprm.rl.agents import DQNAgent, SACAgent
from cliprm.rl.buffers import LabeledTransition, ReplayBuffer, UnlabeledBuffer

log = logging.getLogger(__name__)

CHECKPOINT_FORMAT = "cliprm-checkpoint/1"


@dataclass
class RLConfig:
    algorithm: str = "dqn"
    total_steps: int = 3_000_000
    learning_starts: int = 75_000
    train_freq: int = 200
    updates_per_block: int = 200
    learning_rate: float = 2.3e-3
    gamma: float = 0.99
    tau: float = 1.0
    entropy_coef: object = "auto"
    network_widths: tuple = (256, 256)
    reward_batch: int = 200
    checkpoint_interval: int = 64_000
    seed: int = 0
    batch_size: int = 64
    buffer_size: int = 100_000
    target_update_interval: int = 200
    exploration_fraction: float = 0.16
    exploration_initial_eps: float = 1.0
    exploration_final_eps: float = 0.04
    max_grad_norm: float = 10.0
    reward_window: int = 10

    def __post_init__(self):
        self.network_widths = tuple(int(w) for w in self.network_widths)
        if self.algorithm not in ("dqn", "sac"):
            raise ValidationError(f"algorithm must be 'dqn' or 'sac', got {self.algorithm!r}")
        if not 0.0 < self.gamma <= 1.0:
            raise ValidationError(f"gamma must lie in (0, 1], got {self.gamma}")
        if not 0.0 < self.tau <= 1.0:
            raise ValidationError(f"tau must lie in (0, 1], got {self.tau}")
        for name in ("reward_batch", "train_freq", "checkpoint_interval", "batch_size", "buffer_size",
                     "target_update_interval", "reward_window"):
            if int(getattr(self, name)) < 1:
                raise ValidationError(f"{name} must be >= 1")
        for name in ("total_steps", "learning_starts", "updates_per_block"):
            if int(getattr(self, name)) < 0:
                raise ValidationError(f"{name} must be >= 0")
        if not self.network_widths:
            raise ValidationError("network_widths must list at least one hidden layer")
        if self.entropy_coef != "auto":
            try:
                ok = float(self.entropy_coef) > 0
            except (TypeError, ValueError):
                ok = False
            if not ok:
                raise ValidationError("entropy_coef must be 'auto' or a positive number")

    @classmethod
    def from_dict(cls, d: dict) -> "RLConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValidationError(f"unknown rl fields: {sorted(unknown)}")
        return cls(**d)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["network_widths"] = list(self.network_widths)
        return d


@dataclass
class Checkpoint:
    step: int
    params: dict = field(repr=False)
    mean_reward: float
    meta: dict = field(default_factory=dict, repr=False)
    path: Optional[Path] = None

    def save(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        torch.save({"format": CHECKPOINT_FORMAT, "step": self.step, "mean_reward": self.mean_reward,
                    "meta": self.meta, "params": self.params}, path)
        self.path = path
        return path

    @classmethod
    def load(cls, path) -> "Checkpoint":
        path = Path(path)
        if not path.is_file():
            raise FileNotFoundError(f"checkpoint not found: {path}")
        blob = torch.load(path, map_location="cpu", weights_only=False)
        if not isinstance(blob, dict) or blob.get("format") != CHECKPOINT_FORMAT:
            raise ValidationError(f"{path} is not a cliprm checkpoint")
        return cls(blob["step"], blob["params"], blob["mean_reward"], blob["meta"], path)


def select_best(checkpoints):
    """Checkpoint with the highest trailing-window training reward."""
    if not checkpoints:
        raise ValidationError("no checkpoints to select from")
    return max(checkpoints, key=lambda c: -math.inf if math.isnan(c.mean_reward) else c.mean_reward)


def label_pending(buffer: UnlabeledBuffer, model: RewardModel, encoder) -> list:
    """Label every waiting transition in one batch and empty the buffer.

    All-or-nothing: if the encoder fails, the buffer is left untouched.
    """
    items = buffer.peek_all()
    if not items:
        raise ValidationError("nothing to label")
    frames = np.stack([tr.frame for tr in items])
    rewards = batch_rewards(frames, model, encoder)
    buffer.clear()
    return [
        LabeledTransition(tr.state, tr.action, float(r), tr.next_state, tr.episode, tr.t, tr.gt_reward)
        for tr, r in zip(items, rewards)
    ]


def make_agent(algorithm, obs_dim, action_space, cfg):
    if algorithm == "dqn":
        if not action_space.discrete:
            raise ConfigurationError("dqn needs a discrete action space")
        return DQNAgent(obs_dim, action_space.n, cfg)
    if algorithm == "sac":
        if action_space.discrete:
            raise ConfigurationError("sac needs a continuous action space")
        return SACAgent(obs_dim, action_space.low, action_space.high, cfg)
    raise ConfigurationError(f"unknown algorithm {algorithm!r}")


def _seed_everything(seed):
    torch.manual_seed(seed)
    return np.random.default_rng(seed)


class _EpisodeTracker:
    def __init__(self, length, window):
        self.length = length
        self.partial: dict = {}
        self.window = deque(maxlen=window)
        self.completed = 0

    def add(self, labeled):
        done = []
        for tr in labeled:
            tot, n, gt = self.partial.get(tr.episode, (0.0, 0, 0.0))
            tot, n = tot + tr.reward, n + 1
            gt += tr.gt_reward or 0.0
            if n == self.length:
                self.partial.pop(tr.episode, None)
                self.window.append(tot)
                self.completed += 1
                done.append((tr.episode, tot, gt))
            else:
                self.partial[tr.episode] = (tot, n, gt)
        return done

    @property
    def mean(self):
        return float(np.mean(self.window)) if self.window else float("nan")


LOG_FIELDS = ("step", "episode", "episode_reward", "episode_gt_reward", "mean_reward", "q_loss", "pi_loss",
              "exploration", "config_hash")


def train(env: EnvAdapter, model: RewardModel, encoder, config: RLConfig, output_dir=None,
          config_hash: str = "", on_checkpoint=None, extra_meta=None) -> list:
    """Run the training loop and return the checkpoints in step order.

    With ``output_dir`` set, checkpoints go to ``output_dir/checkpoints`` and
    a CSV log to ``output_dir/train_log.csv``. On an encoder failure the
    unlabelled transitions are dumped to ``output_dir/unlabeled_postmortem.npz``
    before the error propagates.
    """
    # Adam's second-moment estimates drift into subnormal floats on CPU, which
    # makes every optimizer step several times slower; flush them while training.
    # numpy caches its float limits on first use and would warn if that happened
    # with flushing switched on, so warm the cache first.
    for t in (np.float32, np.float64):
        np.finfo(t).smallest_subnormal
    torch.set_flush_denormal(True)
    try:
        return _train(env, model, encoder, config, output_dir, config_hash, on_checkpoint, extra_meta)
    finally:
        torch.set_flush_denormal(False)


def _train(env, model, encoder, config, output_dir, config_hash, on_checkpoint, extra_meta):
    cfg = config
    rng = _seed_everything(cfg.seed)
    state = env.reset(seed=cfg.seed)
    obs_dim = state.size
    agent = make_agent(cfg.algorithm, obs_dim, env.action_space, cfg)
    discrete = env.action_space.discrete
    pending = UnlabeledBuffer(cfg.reward_batch)
    replay = ReplayBuffer(cfg.buffer_size, obs_dim, None if discrete else env.action_space.dim, discrete)
    tracker = _EpisodeTracker(env.episode_length, cfg.reward_window)
    out = Path(output_dir) if output_dir is not None else None
    writer, log_fh = None, None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        log_fh = open(out / "train_log.csv", "a", newline="")
        writer = csv.DictWriter(log_fh, fieldnames=LOG_FIELDS)
        if log_fh.tell() == 0:
            writer.writeheader()
    meta = {
        "algorithm": cfg.algorithm,
        "env_id": env.env_id,
        "obs_dim": obs_dim,
        "action_space": env.action_space.to_dict(),
        "network_widths": list(cfg.network_widths),
        "config_hash": config_hash,
        "rl_config": cfg.to_dict(),
    }
    meta.update(extra_meta or {})
    checkpoints = []
    losses: dict = {}
    explore_steps = max(1, int(cfg.exploration_fraction * cfg.total_steps))
    episode, t = 0, 0
    eps = cfg.exploration_initial_eps
    sampled = 0

    def flush(step):
        try:
            labeled = label_pending(pending, model, encoder)
        except Exception:
            if out is not None:
                _dump_pending(pending, out / "unlabeled_postmortem.npz")
            raise
        replay.extend(labeled)
        for ep, ret, gt in tracker.add(labeled):
            if writer is not None:
                writer.writerow({"step": step, "episode": ep, "episode_reward": ret, "episode_gt_reward": gt,
                                 "mean_reward": tracker.mean, "q_loss": losses.get("q_loss", ""),
                                 "pi_loss": losses.get("pi_loss", ""), "exploration": eps if discrete else losses.get("ent_coef", ""),
                                 "config_hash": config_hash})

    def checkpoint(step):
        ck = Checkpoint(step, agent.policy_state(), tracker.mean, dict(meta))
        if out is not None:
            ck.save(out / "checkpoints" / f"ckpt_{step:09d}.pt")
        checkpoints.append(ck)
        log.info("checkpoint step=%d mean_reward=%.4f", step, ck.mean_reward)
        if on_checkpoint is not None:
            on_checkpoint(ck)

    try:
        for step in range(1, cfg.total_steps + 1):
            if step <= cfg.learning_starts:
                action = env.action_space.sample(rng)
            elif discrete:
                frac = min(1.0, (step - cfg.learning_starts) / explore_steps)
                eps = cfg.exploration_initial_eps + frac * (cfg.exploration_final_eps - cfg.exploration_initial_eps)
                action = agent.act(state, rng, eps)
            else:
                action = agent.act(state)
            next_state, gt, truncated = env.step(action)
            pending.append(Transition(state, action, next_state, env.render(next_state), gt, episode, t))
            sampled += 1
            t += 1
            state = next_state
            if truncated:
                episode += 1
                t = 0
                state = env.reset()
            if pending.ready:
                flush(step)
            if step > cfg.learning_starts and step % cfg.train_freq == 0 and len(replay) >= cfg.batch_size:
                for _ in range(cfg.updates_per_block):
                    losses = agent.update(replay.sample(cfg.batch_size, rng))
            if step % cfg.checkpoint_interval == 0 and step != cfg.total_steps:
                checkpoint(step)
        if len(pending):
            flush(cfg.total_steps)
        checkpoint(cfg.total_steps)
    finally:
        if log_fh is not None:
            log_fh.close()
    if replay.total_added != sampled:  # pragma: no cover - integrity guard
        raise RuntimeError(f"replay integrity violated: {replay.total_added} labelled vs {sampled} sampled")
    return checkpoints


def _dump_pending(buffer, path):
    items = buffer.peek_all()
    if not items:
        return
    np.savez_compressed(
        path,
        states=np.stack([tr.state for tr in items]),
        actions=np.asarray([np.asarray(tr.action, dtype=np.float64) for tr in items]),
        next_states=np.stack([tr.next_state for tr in items]),
        frames=np.stack([tr.frame for tr in items]),
        episodes=np.asarray([tr.episode for tr in items]),
    )
    log.error("encoder failure: %d unlabelled transitions written to %s", len(items), path)


def policy_from_checkpoint(checkpoint: Checkpoint, env: EnvAdapter):
    meta = checkpoint.meta
    if meta.get("env_id") and meta["env_id"] != env.env_id:
        raise ConfigurationError(f"checkpoint was trained on {meta['env_id']!r}, not {env.env_id!r}")
    if env.action_space.to_dict() != meta["action_space"]:
        raise ConfigurationError("checkpoint action space does not match the environment")
    cfg = RLConfig.from_dict(meta["rl_config"])
    agent = make_agent(meta["algorithm"], meta["obs_dim"], env.action_space, cfg)
    agent.load_policy_state(checkpoint.params)
    return agent


@dataclass
class Trajectory:
    states: np.ndarray  # (T + 1, obs_dim), initial state first
    actions: list
    frames: Optional[np.ndarray]  # (T, H, W, 3): frame i shows states[i + 1]
    gt_rewards: Optional[np.ndarray]
    goal_labels: Optional[np.ndarray]
    seed: int = 0

    def __len__(self):
        return len(self.actions)

    @property
    def goal_fraction(self) -> Optional[float]:
        return None if self.goal_labels is None else float(np.mean(self.goal_labels))


def rollout(env: EnvAdapter, checkpoint: Checkpoint, episodes: int, seed=0, render=True) -> list:
    """Run the deterministic policy (greedy / mean action) for ``episodes`` episodes."""
    if int(episodes) < 1:
        raise ValidationError("episodes must be >= 1")
    agent = policy_from_checkpoint(checkpoint, env)
    torch.manual_seed(seed)
    seeds = np.random.default_rng(seed).integers(0, 2**31 - 1, size=int(episodes))
    trajs = []
    for ep_seed in seeds:
        state = env.reset(seed=int(ep_seed))
        states, actions, frames, gts, labels = [state], [], [], [], []
        done = False
        while not done:
            if agent.algorithm == "dqn":
                action = agent.act(state)
            else:
                action = agent.act(state, deterministic=True)
            state, gt, done = env.step(action)
            states.append(state)
            actions.append(action)
            if render:
                frames.append(env.render(state))
            if env.has_ground_truth:
                gts.append(gt)
                labels.append(env.goal_label(state))
        trajs.append(Trajectory(
            np.stack(states), actions, np.stack(frames) if render else None,
            np.asarray(gts, dtype=np.float64) if env.has_ground_truth else None,
            np.asarray(labels, dtype=bool) if env.has_ground_truth else None,
            int(ep_seed),
        ))
    return trajs


def save_rollouts(trajectories, out_dir, checkpoint: Optional[Checkpoint] = None) -> dict:
    """Write frames as PNGs under ``out_dir/frames/traj_XXXX`` plus ``manifest.json``.

    Trajectory refs in the manifest are what trajectory-level label records
    point at; frame refs are relative to ``out_dir``.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    records = []
    for i, tr in enumerate(trajectories):
        ref = f"traj_{i:04d}"
        rec = {"trajectory_ref": ref, "seed": tr.seed, "length": len(tr), "frames": []}
        if tr.frames is not None:
            fdir = out / "frames" / ref
            fdir.mkdir(parents=True, exist_ok=True)
            for t, frame in enumerate(tr.frames):
                name = f"frames/{ref}/step_{t:04d}.png"
                Image.fromarray(frame).save(out / name)
                rec["frames"].append(name)
        if tr.goal_labels is not None:
            rec["goal_fraction"] = tr.goal_fraction
            rec["gt_return"] = float(tr.gt_rewards.sum())
        np.save(out / f"{ref}_states.npy", tr.states)
        records.append(rec)
    manifest = {"trajectories": records}
    if checkpoint is not None:
        manifest.update(checkpoint=str(checkpoint.path) if checkpoint.path else None, step=checkpoint.step,
                        env_id=checkpoint.meta.get("env_id"), config_hash=checkpoint.meta.get("config_hash", ""))
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2))
    return manifest
