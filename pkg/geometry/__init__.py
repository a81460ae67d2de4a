"""Boxes, IoU, box encodings, anchor grids, NMS and proposal selection."""

from .anchors import Anchor, AnchorConfig, AnchorSet, anchor_shapes, generate_anchors
from .boxes import Box, BoxArray, array_to_boxes, box_areas, boxes_to_array, clip_boxes, iou, iou_matrix
from .encoding import (
    DEFAULT_VARIANT,
    BoxEncoding,
    EncodingVariant,
    decode_box,
    decode_boxes,
    encode_box,
    encode_boxes,
)
from .nms import nms, nms_indices, score_order
from .proposals import (
    DEFAULT_MASK_DETECTIONS,
    DEFAULT_PROPOSAL_NMS,
    DEFAULT_PROPOSALS,
    RankedProposals,
    rank_proposals,
    select_proposals,
    top_k,
)

__all__ = [
    "DEFAULT_MASK_DETECTIONS",
    "DEFAULT_PROPOSALS",
    "DEFAULT_PROPOSAL_NMS",
    "DEFAULT_VARIANT",
    "Anchor",
    "AnchorConfig",
    "AnchorSet",
    "Box",
    "BoxArray",
    "BoxEncoding",
    "EncodingVariant",
    "RankedProposals",
    "anchor_shapes",
    "array_to_boxes",
    "box_areas",
    "boxes_to_array",
    "clip_boxes",
    "decode_box",
    "decode_boxes",
    "encode_box",
    "encode_boxes",
    "generate_anchors",
    "iou",
    "iou_matrix",
    "nms",
    "nms_indices",
    "rank_proposals",
    "score_order",
    "select_proposals",
    "top_k",
]
