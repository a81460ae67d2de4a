"""Anchor to ground-truth assignment."""

import logging
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict, Field, model_validator

from errors import ContractError
from geometry import DEFAULT_VARIANT, AnchorSet, Box, EncodingVariant, boxes_to_array, encode_boxes, iou_matrix

logger = logging.getLogger(__name__)

POSITIVE = 1
NEGATIVE = 0
IGNORE = -1


class MatchConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    pos_iou: float = Field(default=0.5, gt=0.0, le=1.0)
    # Lower edge of the optional ignore band; None labels everything below pos_iou negative.
    neg_iou: float | None = Field(default=None, ge=0.0)
    force_best_anchor: bool = True
    variant: EncodingVariant = DEFAULT_VARIANT

    @model_validator(mode="after")
    def _band_below_positive(self) -> "MatchConfig":
        if self.neg_iou is not None and self.neg_iou > self.pos_iou:
            raise ValueError(f"neg_iou ({self.neg_iou}) must not exceed pos_iou ({self.pos_iou})")
        return self


@dataclass(kw_only=True, frozen=True, eq=False)
class MatchResult:
    labels: npt.NDArray[np.int8]
    matched_gt: npt.NDArray[np.int64]
    # Rows are NaN for anchors that are not positive.
    targets: npt.NDArray[np.float64]
    max_iou: npt.NDArray[np.float64]

    def __len__(self) -> int:
        return int(self.labels.shape[0])

    @property
    def positive_indices(self) -> npt.NDArray[np.int64]:
        return np.flatnonzero(self.labels == POSITIVE)

    @property
    def negative_indices(self) -> npt.NDArray[np.int64]:
        return np.flatnonzero(self.labels == NEGATIVE)


def match_anchors(
    anchors: AnchorSet,
    gt: list[Box],
    pos_iou: float = 0.5,
    config: MatchConfig | None = None,
) -> MatchResult:
    """Label each anchor positive when its best IoU with any ground-truth box reaches ``pos_iou``.

    Ties go to the lowest ground-truth index. With ``force_best_anchor``, every ground-truth box
    without a qualifying anchor claims its highest-IoU anchor (lowest anchor index on ties) as
    long as that IoU is above zero and the anchor is not already positive.
    """
    cfg = config or MatchConfig(pos_iou=pos_iou)
    n = len(anchors)
    if n == 0:
        raise ContractError("match_anchors needs a non-empty anchor set")

    labels = np.full(n, NEGATIVE, dtype=np.int8)
    matched = np.full(n, -1, dtype=np.int64)
    targets = np.full((n, 4), np.nan, dtype=np.float64)
    if not gt:
        return MatchResult(labels=labels, matched_gt=matched, targets=targets, max_iou=np.zeros(n))

    gt_boxes = boxes_to_array(gt)
    overlaps = iou_matrix(anchors.boxes, gt_boxes)
    best_gt = np.argmax(overlaps, axis=1)
    max_iou = overlaps[np.arange(n), best_gt]

    positive = max_iou >= cfg.pos_iou
    labels[positive] = POSITIVE
    matched[positive] = best_gt[positive]
    if cfg.neg_iou is not None:
        labels[(max_iou >= cfg.neg_iou) & ~positive] = IGNORE

    if cfg.force_best_anchor:
        for g in range(len(gt)):
            column = overlaps[:, g]
            if np.any(column >= cfg.pos_iou):
                continue
            a = int(np.argmax(column))
            if column[a] > 0.0 and labels[a] != POSITIVE:
                labels[a] = POSITIVE
                matched[a] = g

    pos = np.flatnonzero(labels == POSITIVE)
    targets[pos] = encode_boxes(gt_boxes[matched[pos]], anchors.boxes[pos], cfg.variant)
    logger.debug("Matched %d anchors to %d ground-truth boxes: %d positive", n, len(gt), len(pos))
    return MatchResult(labels=labels, matched_gt=matched, targets=targets, max_iou=max_iou)
