"""Off-policy RL with deferred batched reward labelling."""
from cliprm.rl.agents import DQNAgent, SACAgent
from cliprm.rl.buffers import LabeledTransition, ReplayBuffer, UnlabeledBuffer
from cliprm.rl.harness import (
    Checkpoint,
    RLConfig,
    Trajectory,
    label_pending,
    policy_from_checkpoint,
    rollout,
    save_rollouts,
    select_best,
    train,
)

__all__ = [
    "Checkpoint",
    "DQNAgent",
    "LabeledTransition",
    "RLConfig",
    "ReplayBuffer",
    "SACAgent",
    "Trajectory",
    "UnlabeledBuffer",
    "label_pending",
    "policy_from_checkpoint",
    "rollout",
    "save_rollouts",
    "select_best",
    "train",
]
