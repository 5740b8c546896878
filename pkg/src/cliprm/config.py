"""Run configuration: bundled profiles, prompt presets, overrides and hashing.

A config file is YAML with the top-level sections ``env``, ``encoder``,
``task``, ``rl``, ``evaluation`` plus ``output_dir``, ``seed`` and an optional
``profile`` naming a bundled profile to start from. Sections in the file are
merged over the profile; ``--set a.b=value`` overrides are merged last.
"""
from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional

import yaml

from cliprm.errors import ConfigurationError, ValidationError
from cliprm.reward import TaskSpec
from cliprm.rl.harness import RLConfig

SECTIONS = ("profile", "env", "encoder", "task", "rl", "evaluation", "output_dir", "seed")


def _package_file(name):
    return resources.files("cliprm").joinpath(name)


class PromptRegistry:
    """Goal/baseline prompt pairs keyed by ``<env>/<task>``."""

    def __init__(self, entries: dict):
        self.entries = dict(entries)

    @classmethod
    def bundled(cls) -> "PromptRegistry":
        return cls(yaml.safe_load(_package_file("prompts.yaml").read_text(encoding="utf-8")))

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def lookup(self, key):
        if key not in self.entries:
            raise ConfigurationError(f"task.preset: unknown preset {key!r}; known: {', '.join(sorted(self.entries))}")
        e = self.entries[key]
        return e["goal"], e.get("baseline")


def list_profiles():
    return sorted(p.name[:-5] for p in _package_file("profiles").iterdir() if p.name.endswith(".yaml"))


def load_profile(name) -> dict:
    p = _package_file("profiles").joinpath(f"{name}.yaml")
    if not p.is_file():
        raise ConfigurationError(f"profile: unknown profile {name!r}; bundled: {', '.join(list_profiles())}")
    return yaml.safe_load(p.read_text(encoding="utf-8")) or {}


def deep_merge(base: dict, top: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in top.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = deep_merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def apply_override(d: dict, item: str) -> dict:
    """Apply one ``dotted.key=value`` override; the value is parsed as YAML."""
    if "=" not in item:
        raise ConfigurationError(f"override {item!r} must look like section.key=value")
    key, raw = item.split("=", 1)
    parts = [p for p in key.strip().split(".") if p]
    if not parts or parts[0] not in SECTIONS:
        raise ConfigurationError(f"override {item!r}: unknown section {parts[0] if parts else ''!r}")
    try:
        value = yaml.safe_load(raw)
    except yaml.YAMLError as exc:
        raise ConfigurationError(f"override {item!r}: cannot parse value ({exc})") from None
    out = copy.deepcopy(d)
    node = out
    for p in parts[:-1]:
        node = node.setdefault(p, {})
        if not isinstance(node, dict):
            raise ConfigurationError(f"override {item!r}: {p!r} is not a section")
    node[parts[-1]] = value
    return out


def _section(d, name):
    v = d.get(name) or {}
    if not isinstance(v, dict):
        raise ConfigurationError(f"{name}: expected a mapping")
    return v


def _field_error(section, exc):
    msg = str(exc)
    return ConfigurationError(msg if msg.startswith(section) else f"{section}: {msg}")


@dataclass
class RunConfig:
    env_id: str
    env_options: dict
    model_id: str
    device_spec: tuple
    encoder_options: dict
    task: TaskSpec
    task_preset: Optional[str]
    rl: RLConfig
    evaluation: dict = field(default_factory=dict)
    output_dir: str = "runs/default"
    seed: int = 0
    profile: Optional[str] = None

    @classmethod
    def from_dict(cls, raw: dict, prompts: PromptRegistry = None) -> "RunConfig":
        if not isinstance(raw, dict):
            raise ConfigurationError("config must be a mapping")
        unknown = set(raw) - set(SECTIONS)
        if unknown:
            raise ConfigurationError(f"unknown top-level keys: {sorted(unknown)}")
        d = deep_merge(load_profile(raw["profile"]), raw) if raw.get("profile") else raw
        env = _section(d, "env")
        if "id" not in env:
            raise ConfigurationError("env.id: required")
        from cliprm.envs import ENV_IDS

        if env["id"] not in ENV_IDS:
            raise ConfigurationError(f"env.id: unknown environment {env['id']!r}; choose from {', '.join(ENV_IDS)}")
        enc = _section(d, "encoder")
        if "model_id" not in enc:
            raise ConfigurationError("encoder.model_id: required")
        devices = enc.get("devices", ["cpu"])
        if isinstance(devices, str):
            devices = [devices]

        t = dict(_section(d, "task"))
        preset = t.pop("preset", None)
        if preset is not None:
            goal, base = (prompts or PromptRegistry.bundled()).lookup(preset)
            t.setdefault("goal_prompt", goal)
            t.setdefault("baseline_prompt", base)
        extra = set(t) - {"goal_prompt", "baseline_prompt", "alpha", "context"}
        if extra:
            raise ConfigurationError(f"task: unknown fields {sorted(extra)}")
        if "goal_prompt" not in t:
            raise ConfigurationError("task.goal_prompt: required (or set task.preset)")
        try:
            task = TaskSpec(t["goal_prompt"], t.get("baseline_prompt"), float(t.get("alpha", 0.0)), t.get("context"))
        except ValidationError as exc:
            raise _field_error("task", exc) from None

        seed = int(d.get("seed", 0))
        rl_raw = dict(_section(d, "rl"))
        rl_raw.setdefault("seed", seed)
        try:
            rl = RLConfig.from_dict(rl_raw)
        except (ValidationError, TypeError) as exc:
            raise _field_error("rl", exc) from None

        ev = dict(_section(d, "evaluation"))
        alphas = ev.get("alphas", [task.alpha])
        if any(not 0.0 <= float(a) <= 1.0 for a in alphas):
            raise ConfigurationError("evaluation.alphas: values must lie in [0, 1]")
        if any(float(a) > 0 for a in alphas) and not task.baseline_prompt:
            raise ConfigurationError("evaluation.alphas: alpha > 0 needs task.baseline_prompt")
        ev["alphas"] = [float(a) for a in alphas]
        return cls(
            env_id=env["id"],
            env_options=dict(env.get("options") or {}),
            model_id=str(enc["model_id"]),
            device_spec=tuple(devices),
            encoder_options=dict(enc.get("options") or {}),
            task=task,
            task_preset=preset,
            rl=rl,
            evaluation=ev,
            output_dir=str(d.get("output_dir", "runs/default")),
            seed=seed,
            profile=raw.get("profile"),
        )

    def to_dict(self) -> dict:
        task = {k: v for k, v in self.task.to_dict().items() if v is not None}
        if self.task_preset:
            task["preset"] = self.task_preset
        return {
            "env": {"id": self.env_id, "options": copy.deepcopy(self.env_options)},
            "encoder": {"model_id": self.model_id, "devices": list(self.device_spec),
                        "options": copy.deepcopy(self.encoder_options)},
            "task": task,
            "rl": self.rl.to_dict(),
            "evaluation": copy.deepcopy(self.evaluation),
            "output_dir": self.output_dir,
            "seed": self.seed,
        }

    def digest(self) -> str:
        """Hash of everything that affects results (the output path is excluded)."""
        d = self.to_dict()
        d.pop("output_dir")
        d["task"].pop("preset", None)
        blob = json.dumps(d, sort_keys=True, separators=(",", ":"), default=str).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def dump(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        body = self.to_dict()
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"# config_hash: {self.digest()}\n")
            yaml.safe_dump(body, fh, sort_keys=False)
        return path


def load_config(path=None, overrides=(), profile=None) -> RunConfig:
    raw = {}
    if path is not None:
        path = Path(path)
        if not path.is_file():
            raise ConfigurationError(f"config file not found: {path}")
        try:
            raw = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
        except yaml.YAMLError as exc:
            raise ConfigurationError(f"{path}: invalid YAML ({exc})") from None
    if profile:
        raw = dict(raw, profile=profile)
    for item in overrides:
        raw = apply_override(raw, item)
    return RunConfig.from_dict(raw)
