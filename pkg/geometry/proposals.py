"""Objectness-ranked region proposals."""

import logging
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from errors import ContractError

from .anchors import AnchorSet
from .boxes import Box, BoxArray, array_to_boxes, clip_boxes
from .encoding import DEFAULT_VARIANT, EncodingVariant, decode_boxes
from .nms import nms_indices, score_order

logger = logging.getLogger(__name__)

DEFAULT_PROPOSALS = 600
DEFAULT_PROPOSAL_NMS = 0.7
DEFAULT_MASK_DETECTIONS = 100


@dataclass(kw_only=True, frozen=True, eq=False)
class RankedProposals:
    boxes: BoxArray
    scores: npt.NDArray[np.float64]
    anchor_indices: npt.NDArray[np.int64]

    def __len__(self) -> int:
        return int(self.boxes.shape[0])


def rank_proposals(
    anchors: AnchorSet,
    objectness: npt.ArrayLike,
    deltas: npt.ArrayLike,
    n: int = DEFAULT_PROPOSALS,
    image_w: float = 768,
    image_h: float = 768,
    *,
    nms_threshold: float | None = DEFAULT_PROPOSAL_NMS,
    min_size: float = 0.0,
    variant: EncodingVariant = DEFAULT_VARIANT,
) -> RankedProposals:
    """Decode, clip, filter, suppress and keep the top ``n`` anchors by objectness."""
    scores = np.asarray(objectness, dtype=np.float64).ravel()
    deltas = np.asarray(deltas, dtype=np.float64)
    if len(scores) != len(anchors) or deltas.shape != (len(anchors), 4):
        raise ContractError(
            f"Expected {len(anchors)} scores and ({len(anchors)}, 4) deltas, "
            f"got {len(scores)} and {deltas.shape}"
        )

    boxes = clip_boxes(decode_boxes(deltas, anchors.boxes, variant), image_w, image_h)
    w = boxes[:, 2] - boxes[:, 0]
    h = boxes[:, 3] - boxes[:, 1]
    valid = np.all(np.isfinite(boxes), axis=1) & (w > min_size) & (h > min_size) & np.isfinite(scores)
    candidates = np.flatnonzero(valid)
    # Stable ordering by descending score then anchor index.
    candidates = candidates[score_order(scores[candidates])]

    if nms_threshold is not None:
        kept = nms_indices(boxes[candidates], scores[candidates], nms_threshold)
        candidates = candidates[kept]
    candidates = candidates[:n]

    logger.debug(
        "Proposals: %d anchors, %d valid after decode/clip, %d returned", len(anchors), int(valid.sum()), len(candidates)
    )
    return RankedProposals(boxes=boxes[candidates], scores=scores[candidates], anchor_indices=candidates)


def select_proposals(
    anchors: AnchorSet,
    objectness: npt.ArrayLike,
    deltas: npt.ArrayLike,
    n: int = DEFAULT_PROPOSALS,
    image_w: float = 768,
    image_h: float = 768,
    *,
    nms_threshold: float | None = DEFAULT_PROPOSAL_NMS,
    min_size: float = 0.0,
    variant: EncodingVariant = DEFAULT_VARIANT,
) -> list[Box]:
    ranked = rank_proposals(
        anchors,
        objectness,
        deltas,
        n,
        image_w,
        image_h,
        nms_threshold=nms_threshold,
        min_size=min_size,
        variant=variant,
    )
    return array_to_boxes(ranked.boxes)


def top_k(detections: list[tuple[Box, float]], k: int = DEFAULT_MASK_DETECTIONS) -> list[tuple[Box, float]]:
    """The ``k`` highest-scoring detections (masks are only predicted for these)."""
    order = score_order([score for _, score in detections])
    return [detections[i] for i in order[:k]]
