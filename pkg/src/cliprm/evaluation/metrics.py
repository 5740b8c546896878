"""EPIC distance, canonical shaping and success rate.

All moments use the population convention (divisor n) so that the direct
Pearson route and the conditional-means route agree to rounding error.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from cliprm.errors import DegenerateDistributionError, ValidationError

_VAR_EPS = 1e-15


@dataclass(frozen=True)
class EpicResult:
    pearson_rho: float
    distance: float
    n_samples: int
    p_hat: Optional[float] = None
    mu_source: str = "unspecified"
    route: str = "direct"

    def to_dict(self) -> dict:
        return {
            "pearson_rho": self.pearson_rho,
            "distance": self.distance,
            "n_samples": self.n_samples,
            "p_hat": self.p_hat,
            "mu_source": self.mu_source,
            "route": self.route,
        }


def _finite_1d(x, name):
    a = np.asarray(x, dtype=np.float64).reshape(-1)
    if a.size == 0:
        raise ValidationError(f"{name} is empty")
    if not np.all(np.isfinite(a)):
        raise ValidationError(f"{name} contains non-finite values")
    return a


def canonical_shape(rewards) -> np.ndarray:
    """State-only canonical shaping: subtract the sample mean."""
    r = _finite_1d(rewards, "rewards")
    return r - r.mean()


def distance_from_rho(rho: float) -> float:
    rho = min(1.0, max(-1.0, float(rho)))
    return math.sqrt(1.0 - rho) / math.sqrt(2.0)


def _pair(a, b):
    x = _finite_1d(a, "model rewards")
    y = _finite_1d(b, "reference rewards")
    if x.size != y.size:
        raise ValidationError(f"length mismatch: {x.size} model rewards vs {y.size} references")
    if x.size < 2:
        raise ValidationError("EPIC needs at least two samples")
    return x, y


def _p_hat(y):
    if np.all((y == 0) | (y == 1)):
        return float(y.mean())
    return None


def epic_distance(model_rewards, gt_rewards_or_labels, mu_source="unspecified") -> EpicResult:
    """Pearson-correlation EPIC distance between two state-only rewards."""
    x, y = _pair(model_rewards, gt_rewards_or_labels)
    xc, yc = canonical_shape(x), canonical_shape(y)
    vx, vy = np.mean(xc * xc), np.mean(yc * yc)
    if vx <= _VAR_EPS:
        raise DegenerateDistributionError("model rewards are constant; correlation is undefined")
    if vy <= _VAR_EPS:
        raise DegenerateDistributionError("reference rewards/labels are constant (single class?); correlation is undefined")
    rho = float(np.clip(np.mean(xc * yc) / math.sqrt(vx * vy), -1.0, 1.0))
    return EpicResult(rho, distance_from_rho(rho), int(x.size), _p_hat(y), mu_source, "direct")


def epic_distance_goal_form(model_rewards, labels, mu_source="unspecified") -> EpicResult:
    """EPIC distance for a goal-indicator reward via class-conditional means.

    rho = sqrt(p (1 - p)) / sqrt(Var X) * (E[X | Y=1] - E[X | Y=0])
    """
    x, y = _pair(model_rewards, labels)
    if not np.all((y == 0) | (y == 1)):
        raise ValidationError("labels must be binary (0 or 1)")
    pos = y == 1
    n_pos = int(pos.sum())
    if n_pos == 0 or n_pos == y.size:
        raise DegenerateDistributionError("labels contain a single class; both goal and non-goal states are needed")
    p = n_pos / y.size
    xc = canonical_shape(x)
    vx = np.mean(xc * xc)
    if vx <= _VAR_EPS:
        raise DegenerateDistributionError("model rewards are constant; correlation is undefined")
    gap = x[pos].mean() - x[~pos].mean()
    rho = float(np.clip(math.sqrt(p * (1.0 - p)) / math.sqrt(vx) * gap, -1.0, 1.0))
    return EpicResult(rho, distance_from_rho(rho), int(x.size), p, mu_source, "goal-form")


def success_rate(goal_fractions, threshold: float = 0.5) -> float:
    """Fraction of trajectories whose goal fraction is at least ``threshold``."""
    f = np.asarray(goal_fractions, dtype=np.float64).reshape(-1)
    if f.size == 0:
        raise ValidationError("success_rate needs at least one trajectory")
    if np.any(~np.isfinite(f)) or np.any(f < 0.0) or np.any(f > 1.0):
        raise ValidationError("goal fractions must lie in [0, 1]")
    return float(np.count_nonzero(f >= threshold) / f.size)


@dataclass
class HistogramTable:
    edges: np.ndarray
    positive_counts: np.ndarray
    negative_counts: np.ndarray
    positive_mean: float
    negative_mean: float

    @property
    def separation(self) -> float:
        return self.positive_mean - self.negative_mean

    def rows(self):
        for i in range(len(self.edges) - 1):
            yield self.edges[i], self.edges[i + 1], int(self.positive_counts[i]), int(self.negative_counts[i])


def reward_histograms(labels, rewards, bins=20) -> HistogramTable:
    """Per-class reward histograms on shared bin edges plus class means.

    ``labels`` is a sequence of 0/1 values or a :class:`LabeledFrameSet`.
    """
    y = labels.binary_labels() if hasattr(labels, "binary_labels") else np.asarray(labels, dtype=np.float64)
    r = _finite_1d(rewards, "rewards")
    if y.size != r.size:
        raise ValidationError(f"length mismatch: {y.size} labels vs {r.size} rewards")
    pos = y == 1
    if not np.all((y == 0) | pos):
        raise ValidationError("labels must be binary (0 or 1)")
    edges = np.histogram_bin_edges(r, bins=bins)
    pc, _ = np.histogram(r[pos], bins=edges)
    nc, _ = np.histogram(r[~pos], bins=edges)
    pm = float(r[pos].mean()) if pos.any() else float("nan")
    nm = float(r[~pos].mean()) if (~pos).any() else float("nan")
    return HistogramTable(edges, pc, nc, pm, nm)
