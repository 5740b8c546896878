"""Human-label files: one JSON record per line.

Frame records ``{"kind": "frame", "frame_ref": ..., "label": 0|1}`` label a
single image. Trajectory records ``{"kind": "trajectory", "trajectory_ref":
..., "bucket": 0|25|50|75|100}`` rate a whole trajectory; the bucket becomes a
goal fraction of bucket/100. An optional ``reward`` number may ride along on
either kind.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from cliprm.errors import DegenerateDistributionError, SchemaError, ValidationError

BUCKETS = (0, 25, 50, 75, 100)
MU_SOURCES = ("uniform-sweep", "rollout-induced")


@dataclass(frozen=True)
class LabelRecord:
    kind: str
    ref: str
    label: Optional[int] = None
    goal_fraction: Optional[float] = None
    reward: Optional[float] = None


@dataclass
class LabeledFrameSet:
    records: list = field(default_factory=list)
    mu_source: str = "rollout-induced"

    @property
    def frames(self):
        return [r for r in self.records if r.kind == "frame"]

    @property
    def trajectories(self):
        return [r for r in self.records if r.kind == "trajectory"]

    def binary_labels(self) -> np.ndarray:
        return np.asarray([r.label for r in self.frames], dtype=np.float64)

    def goal_fractions(self) -> np.ndarray:
        return np.asarray([r.goal_fraction for r in self.trajectories], dtype=np.float64)

    def rewards(self) -> Optional[np.ndarray]:
        vals = [r.reward for r in self.frames]
        if not vals or any(v is None for v in vals):
            return None
        return np.asarray(vals, dtype=np.float64)

    @property
    def p_hat(self) -> float:
        y = self.binary_labels()
        if y.size == 0:
            raise ValidationError("no frame-level labels in set")
        return float(y.mean())

    def check_epic_ready(self):
        y = self.binary_labels()
        if y.size == 0 or y.min() == y.max():
            raise DegenerateDistributionError("label set needs at least one positive and one negative frame")


def _is_int(v):
    return isinstance(v, int) and not isinstance(v, bool)


def _parse_line(obj, lineno):
    if not isinstance(obj, dict):
        raise SchemaError("record must be a JSON object", line=lineno)
    kind = obj.get("kind")
    reward = obj.get("reward")
    if reward is not None and (isinstance(reward, bool) or not isinstance(reward, (int, float))):
        raise SchemaError("reward must be a number", line=lineno)
    if kind == "frame":
        allowed = {"kind", "frame_ref", "label", "reward"}
        ref, label = obj.get("frame_ref"), obj.get("label")
        if not isinstance(ref, str) or not ref:
            raise SchemaError("frame record needs a non-empty string frame_ref", line=lineno)
        if not _is_int(label) or label not in (0, 1):
            raise SchemaError(f"frame label must be 0 or 1, got {label!r}", line=lineno)
        rec = LabelRecord("frame", ref, label=label, reward=None if reward is None else float(reward))
    elif kind == "trajectory":
        allowed = {"kind", "trajectory_ref", "bucket", "reward"}
        ref, bucket = obj.get("trajectory_ref"), obj.get("bucket")
        if not isinstance(ref, str) or not ref:
            raise SchemaError("trajectory record needs a non-empty string trajectory_ref", line=lineno)
        if not _is_int(bucket) or bucket not in BUCKETS:
            raise SchemaError(f"bucket must be one of {BUCKETS}, got {bucket!r}", line=lineno)
        rec = LabelRecord("trajectory", ref, goal_fraction=bucket / 100.0,
                          reward=None if reward is None else float(reward))
    else:
        raise SchemaError(f"kind must be 'frame' or 'trajectory', got {kind!r}", line=lineno)
    extra = set(obj) - allowed
    if extra:
        raise SchemaError(f"unexpected fields {sorted(extra)}", line=lineno)
    return rec


def ingest_labels(path, frame_root=None, mu_source="rollout-induced") -> LabeledFrameSet:
    """Parse and validate a label file.

    With ``frame_root`` given, every frame_ref must name an existing file
    relative to it.
    """
    if mu_source not in MU_SOURCES:
        raise ValidationError(f"mu_source must be one of {MU_SOURCES}")
    path = Path(path)
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"invalid JSON ({exc.msg})", line=lineno) from None
            rec = _parse_line(obj, lineno)
            if frame_root is not None and rec.kind == "frame" and not (Path(frame_root) / rec.ref).is_file():
                raise SchemaError(f"unknown frame reference {rec.ref!r}", line=lineno)
            records.append(rec)
    if not records:
        raise ValidationError(f"{path} holds no label records")
    return LabeledFrameSet(records, mu_source)
