from __future__ import annotations

import os
from functools import lru_cache
from pathlib import Path

import yaml

from cliprm.errors import RegistryError, ValidationError

DEFAULT_REGISTRY = Path(__file__).resolve().parent.parent / "registry.yaml"
REGISTRY_ENV = "CLIPRM_REGISTRY"
WEIGHTS_CACHE_ENV = "CLIPRM_WEIGHTS_CACHE"

_REQUIRED = ("backend", "embed_dim", "input_resolution", "mean", "std")


def registry_path(path=None) -> Path:
    if path is not None:
        return Path(path)
    env = os.environ.get(REGISTRY_ENV)
    return Path(env) if env else DEFAULT_REGISTRY


@lru_cache(maxsize=8)
def _read(path: Path) -> dict:
    try:
        doc = yaml.safe_load(path.read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise RegistryError(f"registry file not found: {path}") from exc
    models = (doc or {}).get("models")
    if not isinstance(models, dict):
        raise RegistryError(f"{path}: missing top-level 'models' mapping")
    for name, entry in models.items():
        missing = [k for k in _REQUIRED if k not in entry]
        if missing:
            raise RegistryError(f"{path}: entry {name!r} lacks {', '.join(missing)}")
        if int(entry["embed_dim"]) <= 0:
            raise ValidationError(f"{path}: entry {name!r} has non-positive embed_dim")
    return models


def load_registry(path=None) -> dict:
    """Return ``{model_id: entry}`` from the registry file (copied)."""
    return {k: dict(v) for k, v in _read(registry_path(path)).items()}


def registry_entry(model_id: str, path=None) -> dict:
    models = load_registry(path)
    if model_id not in models:
        known = ", ".join(sorted(models))
        raise RegistryError(f"unknown model_id {model_id!r}; registry has: {known}")
    return models[model_id]


def weights_cache_dir():
    env = os.environ.get(WEIGHTS_CACHE_ENV)
    return Path(env).expanduser() if env else None
