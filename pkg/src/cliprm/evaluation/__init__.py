"""Reward-model and policy evaluation."""
from cliprm.evaluation.labels import LabeledFrameSet, LabelRecord, ingest_labels
from cliprm.evaluation.landscape import LandscapeTable, reward_landscape
from cliprm.evaluation.metrics import (
    EpicResult,
    HistogramTable,
    canonical_shape,
    distance_from_rho,
    epic_distance,
    epic_distance_goal_form,
    reward_histograms,
    success_rate,
)

__all__ = [
    "EpicResult",
    "HistogramTable",
    "LabelRecord",
    "LabeledFrameSet",
    "LandscapeTable",
    "canonical_shape",
    "distance_from_rho",
    "epic_distance",
    "epic_distance_goal_form",
    "ingest_labels",
    "reward_histograms",
    "reward_landscape",
    "success_rate",
]
