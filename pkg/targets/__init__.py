"""Anchor matching, RoI sampling and the detection/mask losses."""

from .losses import (
    MASK_SIZE,
    PROB_EPS,
    LossValue,
    LossWeights,
    classification_loss,
    location_loss,
    mask_loss,
    mean_total_loss,
    select_class_mask,
    sigmoid,
    smooth_l1,
    total_loss,
)
from .matching import IGNORE, NEGATIVE, POSITIVE, MatchConfig, MatchResult, match_anchors
from .sampling import sample_rois

__all__ = [
    "IGNORE",
    "MASK_SIZE",
    "NEGATIVE",
    "POSITIVE",
    "PROB_EPS",
    "LossValue",
    "LossWeights",
    "MatchConfig",
    "MatchResult",
    "classification_loss",
    "location_loss",
    "mask_loss",
    "match_anchors",
    "mean_total_loss",
    "sample_rois",
    "select_class_mask",
    "sigmoid",
    "smooth_l1",
    "total_loss",
]
