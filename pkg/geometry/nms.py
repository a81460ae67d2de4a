"""Greedy non-maximum suppression."""

import numpy as np
import numpy.typing as npt

from errors import ContractError

from .boxes import Box, BoxArray, box_areas, boxes_to_array


def score_order(scores: npt.ArrayLike) -> npt.NDArray[np.int64]:
    """Indices by descending score, ties broken by ascending index."""
    scores = np.asarray(scores, dtype=np.float64)
    return np.lexsort((np.arange(len(scores)), -scores))


def nms_indices(boxes: BoxArray, scores: npt.ArrayLike, iou_threshold: float) -> npt.NDArray[np.int64]:
    """Kept indices, highest score first. A box is dropped when its IoU with a kept box exceeds the threshold."""
    boxes = np.asarray(boxes, dtype=np.float64).reshape(-1, 4)
    scores = np.asarray(scores, dtype=np.float64)
    if len(boxes) != len(scores):
        raise ContractError(f"nms got {len(boxes)} boxes but {len(scores)} scores")
    if not np.all(np.isfinite(scores)):
        raise ContractError("nms scores must be finite")
    if not 0.0 <= iou_threshold <= 1.0:
        raise ContractError(f"nms threshold must lie in [0, 1], got {iou_threshold}")

    x1, y1, x2, y2 = boxes[:, 0], boxes[:, 1], boxes[:, 2], boxes[:, 3]
    areas = box_areas(boxes)
    order = score_order(scores)

    keep = []
    while order.size > 0:
        i = order[0]
        keep.append(i)
        rest = order[1:]
        iw = np.maximum(0.0, np.minimum(x2[i], x2[rest]) - np.maximum(x1[i], x1[rest]))
        ih = np.maximum(0.0, np.minimum(y2[i], y2[rest]) - np.maximum(y1[i], y1[rest]))
        inter = iw * ih
        overlap = inter / (areas[i] + areas[rest] - inter)
        order = rest[overlap <= iou_threshold]
    return np.asarray(keep, dtype=np.int64)


def nms(detections: list[tuple[Box, float]], iou_threshold: float) -> list[tuple[Box, float]]:
    if not detections:
        return []
    boxes = boxes_to_array([box for box, _ in detections])
    scores = np.array([score for _, score in detections], dtype=np.float64)
    return [detections[i] for i in nms_indices(boxes, scores, iou_threshold)]
