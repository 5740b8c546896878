from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from cliprm import kernels
from cliprm.encoders.mock import MockBackend
from cliprm.encoders.registry import registry_entry, registry_path
from cliprm.errors import DeviceError, NumericError, ValidationError


@dataclass(frozen=True, eq=False)
class Embedding:
    values: np.ndarray
    normalized: bool = False

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 1 or v.size == 0:
            raise ValidationError(f"embedding must be a non-empty 1-D vector, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise NumericError("embedding contains non-finite entries")
        if self.normalized and abs(np.linalg.norm(v) - 1.0) > 1e-6:
            raise ValidationError("embedding flagged normalized but its norm is not 1")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self):
        return self.values.shape[0]

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.values))

    def normalize(self) -> "Embedding":
        n = self.norm
        if n == 0.0:
            raise NumericError("cannot normalize a zero-norm embedding")
        return Embedding(self.values / n, normalized=True)


def _check_frame(frame, where=""):
    a = np.asarray(frame)
    if a.ndim != 3 or a.shape[2] != 3:
        raise ValidationError(f"frame{where} must be H x W x 3, got shape {a.shape}")
    if a.shape[0] == 0 or a.shape[1] == 0:
        raise ValidationError(f"frame{where} has zero area")
    if a.dtype != np.uint8:
        raise ValidationError(f"frame{where} must be uint8, got {a.dtype}")
    return a


@dataclass(frozen=True, eq=False)
class FrameBatch:
    """Equal-sized RGB frames stacked as an (N, H, W, 3) uint8 array."""

    frames: np.ndarray
    source_ids: tuple = ()

    def __post_init__(self):
        a = np.asarray(self.frames)
        if a.ndim != 4 or a.shape[3] != 3 or a.shape[1] == 0 or a.shape[2] == 0:
            raise ValidationError(f"frame batch must be N x H x W x 3 with positive H, W; got {a.shape}")
        if a.dtype != np.uint8:
            raise ValidationError(f"frame batch must be uint8, got {a.dtype}")
        ids = tuple(self.source_ids) if self.source_ids else tuple(range(a.shape[0]))
        if len(ids) != a.shape[0]:
            raise ValidationError(f"{len(ids)} source ids for {a.shape[0]} frames")
        object.__setattr__(self, "frames", a)
        object.__setattr__(self, "source_ids", ids)

    @classmethod
    def from_frames(cls, frames: Sequence, source_ids=None) -> "FrameBatch":
        frames = list(frames)
        if not frames:
            raise ValidationError("frame batch is empty")
        checked = [_check_frame(f, f" {i}") for i, f in enumerate(frames)]
        shape = checked[0].shape
        for i, f in enumerate(checked):
            if f.shape != shape:
                raise ValidationError(f"frame {i} has shape {f.shape}, expected {shape}")
        return cls(np.stack(checked), tuple(source_ids) if source_ids is not None else ())

    def __len__(self):
        return self.frames.shape[0]

    def split(self, sizes):
        out, start = [], 0
        for n in sizes:
            out.append(FrameBatch(self.frames[start : start + n], self.source_ids[start : start + n]))
            start += n
        return out


def preprocess_frame(frame, resolution=224, mean=(0.5, 0.5, 0.5), std=(0.5, 0.5, 0.5)) -> np.ndarray:
    """Bilinear-resize the shorter side to ``resolution``, centre-crop, normalise.

    Returns a float32 (3, resolution, resolution) array.
    """
    a = _check_frame(frame)
    h, w, _ = a.shape
    if h == resolution and w == resolution:
        img = a.astype(np.float32)
    else:
        scale = resolution / min(h, w)
        nh = max(resolution, int(round(h * scale)))
        nw = max(resolution, int(round(w * scale)))
        img = kernels.resize_bilinear(np.ascontiguousarray(a, dtype=np.float32), nh, nw)
        top = (nh - resolution) // 2
        left = (nw - resolution) // 2
        img = img[top : top + resolution, left : left + resolution]
    m = np.asarray(mean, dtype=np.float32)
    s = np.asarray(std, dtype=np.float32)
    out = (img / np.float32(255.0) - m) / s
    return np.ascontiguousarray(out.transpose(2, 0, 1))


def _check_devices(device_spec):
    import torch

    devices = tuple(str(d) for d in device_spec) if device_spec else ("cpu",)
    for d in devices:
        kind, _, idx = d.partition(":")
        if idx and not idx.isdigit():
            raise DeviceError(f"malformed device {d!r}")
        if kind == "cpu":
            continue
        if kind == "cuda":
            count = torch.cuda.device_count()
            if count == 0 or (idx and int(idx) >= count):
                raise DeviceError(f"device {d!r} unavailable ({count} CUDA devices visible)")
            continue
        if kind == "mps" and torch.backends.mps.is_available():
            continue
        raise DeviceError(f"device {d!r} unavailable")
    return devices


@dataclass(frozen=True, eq=False)
class EncoderHandle:
    model_id: str
    embed_dim: int
    input_resolution: int
    device_spec: tuple
    mean: tuple
    std: tuple
    context_length: int
    image_batch_size: int = 256
    backend: Any = field(default=None, repr=False)

    @property
    def is_mock(self) -> bool:
        return isinstance(self.backend, MockBackend)

    def preprocess(self, frame) -> np.ndarray:
        return preprocess_frame(frame, self.input_resolution, self.mean, self.std)

    def text_array(self, prompts) -> np.ndarray:
        prompts = list(prompts)
        if not prompts:
            raise ValidationError("no prompts given")
        for i, p in enumerate(prompts):
            if not isinstance(p, str):
                raise ValidationError(f"prompt {i} is not a string")
            n = self.backend.token_count(p)
            if n > self.context_length:
                raise ValidationError(f"prompt {i} has {n} tokens; limit is {self.context_length}")
        out = np.asarray(self.backend.text(prompts), dtype=np.float64)
        if not np.all(np.isfinite(out)):
            raise NumericError("text encoder produced non-finite values")
        return out

    def image_array(self, frames) -> np.ndarray:
        """Embed an (N, H, W, 3) uint8 array; rows follow input order.

        The batch is cut into one contiguous slice per device, and each slice
        into sub-batches of at most ``image_batch_size`` frames.
        """
        if isinstance(frames, FrameBatch):
            frames = frames.frames
        frames = np.asarray(frames)
        if frames.ndim != 4 or frames.shape[0] == 0:
            raise ValidationError(f"expected a non-empty N x H x W x 3 batch, got shape {frames.shape}")
        FrameBatch(frames)  # shape/dtype validation
        n = frames.shape[0]
        chunks = np.array_split(np.arange(n), len(self.device_spec))
        parts = []
        for dev, idx in zip(self.device_spec, chunks):
            for start in range(0, len(idx), self.image_batch_size):
                sel = idx[start : start + self.image_batch_size]
                sub = frames[sel[0] : sel[-1] + 1]
                if self.is_mock:
                    parts.append(self.backend.images(sub, dev))
                else:
                    pix = np.stack([self.preprocess(f) for f in sub])
                    parts.append(self.backend.images(pix, dev))
        out = np.concatenate(parts, axis=0)
        if not np.all(np.isfinite(out)):
            raise NumericError("image encoder produced non-finite values")
        return out


def encode_text(handle: EncoderHandle, prompts) -> list:
    """Raw (unnormalised) text embeddings, one per prompt."""
    return [Embedding(v) for v in handle.text_array(prompts)]


def encode_images(handle: EncoderHandle, batch) -> list:
    if not isinstance(batch, FrameBatch):
        batch = FrameBatch.from_frames(batch)
    return [Embedding(v) for v in handle.image_array(batch.frames)]


_CACHE: dict = {}
_LOCK = threading.Lock()


def _freeze(obj):
    if isinstance(obj, dict):
        return tuple(sorted((k, _freeze(v)) for k, v in obj.items()))
    if isinstance(obj, (list, tuple)):
        return tuple(_freeze(v) for v in obj)
    return obj


def load_encoder(model_id: str, device_spec=("cpu",), registry=None, **options) -> EncoderHandle:
    """Resolve ``model_id`` in the registry and return a (cached) handle.

    Mock options: ``embed_dim``, ``seed``, ``directions``. Any encoder accepts
    ``image_batch_size``.
    """
    entry = registry_entry(model_id, registry)
    devices = _check_devices(device_spec)
    key = (str(registry_path(registry)), model_id, devices, _freeze(options))
    with _LOCK:
        if key in _CACHE:
            return _CACHE[key]
        opts = dict(options)
        batch_size = int(opts.pop("image_batch_size", 256))
        backend_name = entry["backend"]
        if backend_name == "mock":
            directions = dict(entry.get("directions") or {})
            directions.update(opts.pop("directions", None) or {})
            backend = MockBackend(
                embed_dim=int(opts.pop("embed_dim", entry["embed_dim"])),
                seed=int(opts.pop("seed", entry.get("seed", 0))),
                directions=directions,
                context_length=int(entry.get("context_length", 77)),
            )
        elif backend_name == "transformers":
            from cliprm.encoders.towers import TransformersBackend

            backend = TransformersBackend(entry, devices)
        elif backend_name == "open_clip":
            from cliprm.encoders.towers import OpenClipBackend

            backend = OpenClipBackend(entry, devices)
        else:
            raise ValidationError(f"registry entry {model_id!r} has unknown backend {backend_name!r}")
        if opts:
            raise ValidationError(f"unsupported encoder options for {model_id!r}: {sorted(opts)}")
        handle = EncoderHandle(
            model_id=model_id,
            embed_dim=backend.embed_dim,
            input_resolution=int(entry["input_resolution"]),
            device_spec=devices,
            mean=tuple(float(x) for x in entry["mean"]),
            std=tuple(float(x) for x in entry["std"]),
            context_length=int(entry.get("context_length", 77)),
            image_batch_size=batch_size,
            backend=backend,
        )
        _CACHE[key] = handle
        return handle
