"""Axis-aligned boxes and IoU.

Coordinates are continuous pixels with the origin at the top-left and y growing
downward. A box covers the half-open region [x1, x2) x [y1, y2), so a box with
integer corners covers exactly (x2 - x1) * (y2 - y1) pixels.
"""

import math
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from errors import DomainError

BoxArray = npt.NDArray[np.float64]


@dataclass(frozen=True)
class Box:
    x1: float
    y1: float
    x2: float
    y2: float

    def __post_init__(self):
        coords = (self.x1, self.y1, self.x2, self.y2)
        if not all(math.isfinite(c) for c in coords):
            raise DomainError(f"Box has non-finite coordinates: {coords}")
        if self.x2 <= self.x1 or self.y2 <= self.y1:
            raise DomainError(f"Degenerate box: {coords}")

    @property
    def width(self) -> float:
        return self.x2 - self.x1

    @property
    def height(self) -> float:
        return self.y2 - self.y1

    @property
    def area(self) -> float:
        return (self.x2 - self.x1) * (self.y2 - self.y1)

    @property
    def center(self) -> tuple[float, float]:
        return (self.x1 + 0.5 * self.width, self.y1 + 0.5 * self.height)

    @classmethod
    def from_center(cls, xc: float, yc: float, w: float, h: float) -> "Box":
        return cls(xc - 0.5 * w, yc - 0.5 * h, xc + 0.5 * w, yc + 0.5 * h)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.x1, self.y1, self.x2, self.y2)

    def translate(self, dx: float, dy: float) -> "Box":
        return Box(self.x1 + dx, self.y1 + dy, self.x2 + dx, self.y2 + dy)

    def scale(self, factor: float) -> "Box":
        return Box(self.x1 * factor, self.y1 * factor, self.x2 * factor, self.y2 * factor)

    def clip(self, width: float, height: float) -> "Box | None":
        """Clip to [0, width) x [0, height); None when nothing is left."""
        x1, y1 = max(self.x1, 0.0), max(self.y1, 0.0)
        x2, y2 = min(self.x2, float(width)), min(self.y2, float(height))
        if x2 <= x1 or y2 <= y1:
            return None
        return Box(x1, y1, x2, y2)


def boxes_to_array(boxes: list[Box]) -> BoxArray:
    if not boxes:
        return np.zeros((0, 4), dtype=np.float64)
    return np.array([b.as_tuple() for b in boxes], dtype=np.float64)


def array_to_boxes(arr: BoxArray) -> list[Box]:
    return [Box(*map(float, row)) for row in np.asarray(arr, dtype=np.float64).reshape(-1, 4)]


def box_areas(boxes: BoxArray) -> npt.NDArray[np.float64]:
    return (boxes[:, 2] - boxes[:, 0]) * (boxes[:, 3] - boxes[:, 1])


def iou(a: Box, b: Box) -> float:
    """Intersection over union of two valid boxes."""
    # Operation order mirrors iou_matrix so both give identical floats.
    iw = max(0.0, min(a.x2, b.x2) - max(a.x1, b.x1))
    ih = max(0.0, min(a.y2, b.y2) - max(a.y1, b.y1))
    inter = iw * ih
    union = a.area + b.area - inter
    return inter / union


def iou_matrix(boxes_a: BoxArray, boxes_b: BoxArray) -> npt.NDArray[np.float64]:
    """Pairwise IoU, shape (len(boxes_a), len(boxes_b))."""
    a = np.asarray(boxes_a, dtype=np.float64).reshape(-1, 4)
    b = np.asarray(boxes_b, dtype=np.float64).reshape(-1, 4)
    if np.any(a[:, 2] <= a[:, 0]) or np.any(a[:, 3] <= a[:, 1]):
        raise DomainError("iou_matrix received a degenerate box in the first operand")
    if np.any(b[:, 2] <= b[:, 0]) or np.any(b[:, 3] <= b[:, 1]):
        raise DomainError("iou_matrix received a degenerate box in the second operand")

    iw = np.maximum(0.0, np.minimum(a[:, None, 2], b[None, :, 2]) - np.maximum(a[:, None, 0], b[None, :, 0]))
    ih = np.maximum(0.0, np.minimum(a[:, None, 3], b[None, :, 3]) - np.maximum(a[:, None, 1], b[None, :, 1]))
    inter = iw * ih
    union = box_areas(a)[:, None] + box_areas(b)[None, :] - inter
    return inter / union


def clip_boxes(boxes: BoxArray, width: float, height: float) -> BoxArray:
    out = np.array(boxes, dtype=np.float64, copy=True).reshape(-1, 4)
    out[:, 0::2] = np.clip(out[:, 0::2], 0.0, float(width))
    out[:, 1::2] = np.clip(out[:, 1::2], 0.0, float(height))
    return out
