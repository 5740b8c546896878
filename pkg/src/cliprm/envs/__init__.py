"""Environment adapters: time-limit-only episodes, ground truth for evaluation, rendering."""
from __future__ import annotations

from cliprm.envs.base import ActionSpace, EnvAdapter, StateSweep, Transition
from cliprm.envs.classic import CartPoleNoTermination, MountainCarNoTermination
from cliprm.errors import ValidationError

ENV_IDS = ("cartpole-nt", "mountaincar-nt", "mountaincar-textured", "humanoid-custom")


def make_env(env_id: str, **options) -> EnvAdapter:
    if "render_size" in options and options["render_size"] is not None:
        options["render_size"] = tuple(options["render_size"])
    if env_id == "cartpole-nt":
        return CartPoleNoTermination(**options)
    if env_id == "mountaincar-nt":
        return MountainCarNoTermination(textured=False, **options)
    if env_id == "mountaincar-textured":
        return MountainCarNoTermination(textured=True, **options)
    if env_id == "humanoid-custom":
        from cliprm.envs.humanoid import HumanoidCustom

        return HumanoidCustom(**options)
    raise ValidationError(f"unknown env_id {env_id!r}; choose from {', '.join(ENV_IDS)}")


def render(env: EnvAdapter, state):
    return env.render(state)


def sweep_states(env: EnvAdapter, parameter: str, range_, count: int) -> StateSweep:
    lo, hi = range_
    return env.sweep_states(parameter, float(lo), float(hi), count)


def gt_goal_label(env: EnvAdapter, state) -> bool:
    return bool(env.goal_label(state))


__all__ = [
    "ENV_IDS",
    "ActionSpace",
    "CartPoleNoTermination",
    "EnvAdapter",
    "MountainCarNoTermination",
    "StateSweep",
    "Transition",
    "gt_goal_label",
    "make_env",
    "render",
    "sweep_states",
]
