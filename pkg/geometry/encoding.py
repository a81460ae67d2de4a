"""Box encodings relative to an anchor.

Two variants are supported:

- ``anchor_relative``: ``[(xc - xa) / wa, (yc - ya) / ha, log(w / wa), log(h / ha)]``,
  the Faster R-CNN form and the default.
- ``absolute``: ``[xc / wa, yc / ha, log w, log h]``, center scaled by the anchor size and raw log size.
"""

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
import numpy.typing as npt

from errors import DomainError

from .anchors import Anchor
from .boxes import Box, BoxArray

EncodingVariant = Literal["anchor_relative", "absolute"]
DEFAULT_VARIANT: EncodingVariant = "anchor_relative"


@dataclass(frozen=True)
class BoxEncoding:
    tx: float
    ty: float
    tw: float
    th: float
    variant: EncodingVariant = DEFAULT_VARIANT

    def __post_init__(self):
        if not all(math.isfinite(v) for v in self.values):
            raise DomainError(f"Box encoding has non-finite values: {self.values}")

    @property
    def values(self) -> tuple[float, float, float, float]:
        return (self.tx, self.ty, self.tw, self.th)

    def as_array(self) -> npt.NDArray[np.float64]:
        return np.array(self.values, dtype=np.float64)


def _centers(boxes: BoxArray) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    w = boxes[:, 2] - boxes[:, 0]
    h = boxes[:, 3] - boxes[:, 1]
    return boxes[:, 0] + 0.5 * w, boxes[:, 1] + 0.5 * h, w, h


def encode_boxes(boxes: BoxArray, anchors: BoxArray, variant: EncodingVariant = DEFAULT_VARIANT) -> np.ndarray:
    """Encode each box against the anchor in the same row; returns (N, 4)."""
    boxes = np.asarray(boxes, dtype=np.float64).reshape(-1, 4)
    anchors = np.asarray(anchors, dtype=np.float64).reshape(-1, 4)
    xc, yc, w, h = _centers(boxes)
    xa, ya, wa, ha = _centers(anchors)
    if variant == "anchor_relative":
        return np.stack([(xc - xa) / wa, (yc - ya) / ha, np.log(w / wa), np.log(h / ha)], axis=1)
    if variant == "absolute":
        return np.stack([xc / wa, yc / ha, np.log(w), np.log(h)], axis=1)
    raise ValueError(f"Unknown encoding variant: {variant!r}")


def decode_boxes(deltas: np.ndarray, anchors: BoxArray, variant: EncodingVariant = DEFAULT_VARIANT) -> BoxArray:
    """Inverse of encode_boxes. Non-finite results are returned as-is; callers filter them."""
    deltas = np.asarray(deltas, dtype=np.float64).reshape(-1, 4)
    anchors = np.asarray(anchors, dtype=np.float64).reshape(-1, 4)
    xa, ya, wa, ha = _centers(anchors)
    with np.errstate(over="ignore", invalid="ignore"):
        if variant == "anchor_relative":
            xc = deltas[:, 0] * wa + xa
            yc = deltas[:, 1] * ha + ya
            w = np.exp(deltas[:, 2]) * wa
            h = np.exp(deltas[:, 3]) * ha
        elif variant == "absolute":
            xc = deltas[:, 0] * wa
            yc = deltas[:, 1] * ha
            w = np.exp(deltas[:, 2])
            h = np.exp(deltas[:, 3])
        else:
            raise ValueError(f"Unknown encoding variant: {variant!r}")
        return np.stack([xc - 0.5 * w, yc - 0.5 * h, xc + 0.5 * w, yc + 0.5 * h], axis=1)


def encode_box(box: Box, anchor: Box | Anchor, variant: EncodingVariant = DEFAULT_VARIANT) -> BoxEncoding:
    """Encode ``box`` relative to an anchor (an ``Anchor`` or a plain ``Box``)."""
    anchor_box = anchor.box if isinstance(anchor, Anchor) else anchor
    t = encode_boxes(np.array([box.as_tuple()]), np.array([anchor_box.as_tuple()]), variant)[0]
    return BoxEncoding(*map(float, t), variant=variant)


def decode_box(encoding: BoxEncoding, anchor: Box | Anchor) -> Box:
    anchor_box = anchor.box if isinstance(anchor, Anchor) else anchor
    xa, ya = anchor_box.center
    wa, ha = anchor_box.width, anchor_box.height
    try:
        if encoding.variant == "anchor_relative":
            xc, yc = encoding.tx * wa + xa, encoding.ty * ha + ya
            w, h = math.exp(encoding.tw) * wa, math.exp(encoding.th) * ha
        else:
            xc, yc = encoding.tx * wa, encoding.ty * ha
            w, h = math.exp(encoding.tw), math.exp(encoding.th)
    except OverflowError as exc:
        raise DomainError(f"Decoded size overflows for encoding {encoding.values}") from exc
    if not (math.isfinite(w) and math.isfinite(h)) or w <= 0 or h <= 0:
        raise DomainError(f"Decoded box has invalid size {w}x{h}")
    return Box.from_center(xc, yc, w, h)
