"""Greedy detection to ground-truth matching."""

import logging
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
import numpy.typing as npt

from errors import ContractError
from geometry import Box, iou
from masks import mask_iou

logger = logging.getLogger(__name__)

MatchMode = Literal["bbox", "mask"]


@dataclass(kw_only=True, frozen=True, eq=False)
class Detection:
    image_id: str
    class_id: int
    score: float
    box: Box
    mask: npt.NDArray[np.bool_] | None = field(default=None, repr=False)

    def __post_init__(self):
        if not np.isfinite(self.score):
            raise ContractError(f"Detection score must be finite, got {self.score}")


@dataclass(kw_only=True, frozen=True, eq=False)
class GroundTruth:
    image_id: str
    class_id: int
    box: Box
    mask: npt.NDArray[np.bool_] | None = field(default=None, repr=False)


@dataclass(kw_only=True, frozen=True)
class MatchRecord:
    det_index: int
    image_id: str
    class_id: int
    score: float
    gt_index: int | None
    # Best overlap with any ground truth of the same image and class.
    overlap: float
    is_tp: bool
    # Content-derived ordering key, see detection_key.
    rank_key: tuple = ()


def detection_key(det: Detection) -> tuple:
    """Canonical order: score descending, then content, never input position."""
    return (-det.score, det.image_id, det.class_id, det.box.as_tuple())


def _overlap(det: Detection, gt: GroundTruth, mode: MatchMode) -> float:
    if mode == "bbox":
        return iou(det.box, gt.box)
    return mask_iou(det.mask, gt.mask)


def match_detections(
    dets: list[Detection],
    gts: list[GroundTruth],
    iou_threshold: float = 0.5,
    mode: MatchMode = "bbox",
    *,
    strict: bool = False,
) -> list[MatchRecord]:
    """Match in descending score order; each detection takes the highest-overlap unmatched
    ground truth of its image and class whose overlap reaches the threshold (exceeds it when
    ``strict``). Returned records are in ranked order.
    """
    if mode == "mask":
        if any(d.mask is None for d in dets) or any(g.mask is None for g in gts):
            raise ContractError("Mask matching needs masks on every detection and ground truth")

    groups: dict[tuple[str, int], list[int]] = defaultdict(list)
    for index, gt in enumerate(gts):
        groups[(gt.image_id, gt.class_id)].append(index)
    for members in groups.values():
        members.sort(key=lambda k: gts[k].box.as_tuple())

    matched: set[int] = set()
    records = []
    order = sorted(range(len(dets)), key=lambda k: detection_key(dets[k]))
    for d in order:
        det = dets[d]
        best_gt, best_overlap, top_overlap = None, -1.0, 0.0
        for g in groups.get((det.image_id, det.class_id), []):
            overlap = _overlap(det, gts[g], mode)
            top_overlap = max(top_overlap, overlap)
            if g in matched:
                continue
            passes = overlap > iou_threshold if strict else overlap >= iou_threshold
            if passes and overlap > best_overlap:
                best_gt, best_overlap = g, overlap
        if best_gt is not None:
            matched.add(best_gt)
        records.append(
            MatchRecord(
                det_index=d,
                image_id=det.image_id,
                class_id=det.class_id,
                score=det.score,
                gt_index=best_gt,
                overlap=best_overlap if best_gt is not None else top_overlap,
                is_tp=best_gt is not None,
                rank_key=detection_key(det),
            )
        )
    logger.debug("Matched %d detections against %d ground truths (%s)", len(dets), len(gts), mode)
    return records
