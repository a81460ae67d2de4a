"""Precision-recall curves and average precision."""

from collections.abc import Sequence
from typing import Literal

import numpy as np
import numpy.typing as npt

from .matching import MatchRecord

Interpolation = Literal["all_points", "eleven_point"]


def precision_recall(
    tp_flags: Sequence[bool], n_gt: int
) -> tuple[npt.NDArray[np.float64], npt.NDArray[np.float64]]:
    """Cumulative (precision, recall) after each ranked detection."""
    tp = np.asarray(tp_flags, dtype=np.float64)
    acc_tp = np.cumsum(tp)
    acc_fp = np.cumsum(1.0 - tp)
    precision = acc_tp / np.maximum(acc_tp + acc_fp, 1.0)
    recall = acc_tp / n_gt if n_gt > 0 else np.zeros_like(acc_tp)
    return precision, recall


def _all_points(precision: np.ndarray, recall: np.ndarray) -> float:
    mrec = np.concatenate([[0.0], recall, [1.0]])
    mpre = np.concatenate([[0.0], precision, [0.0]])
    # Precision envelope: best precision at any equal or higher recall.
    mpre = np.maximum.accumulate(mpre[::-1])[::-1]
    steps = np.flatnonzero(mrec[1:] != mrec[:-1])
    return float(np.sum((mrec[steps + 1] - mrec[steps]) * mpre[steps + 1]))


def _eleven_point(precision: np.ndarray, recall: np.ndarray) -> float:
    total = 0.0
    for t in np.linspace(0.0, 1.0, 11):
        above = precision[recall >= t]
        total += float(above.max()) if above.size else 0.0
    return total / 11.0


def average_precision(
    matches: Sequence[MatchRecord],
    n_gt: int,
    interpolation: Interpolation = "all_points",
) -> float | None:
    """Area under the interpolated precision-recall curve.

    Returns None when there is neither ground truth nor detection (the class is excluded
    from mAP) and 0.0 when there are detections but no ground truth.
    """
    if n_gt < 0:
        raise ValueError(f"n_gt must be non-negative, got {n_gt}")
    if n_gt == 0:
        return None if not matches else 0.0
    if not matches:
        return 0.0
    ranked = sorted(matches, key=lambda m: m.rank_key)
    precision, recall = precision_recall([m.is_tp for m in ranked], n_gt)
    if interpolation == "all_points":
        return _all_points(precision, recall)
    if interpolation == "eleven_point":
        return _eleven_point(precision, recall)
    raise ValueError(f"Unknown interpolation: {interpolation!r}")
