"""Pasting head masks into the image frame, and mask overlap."""

import math

import numpy as np
import numpy.typing as npt

from errors import ContractError
from geometry import Box

MaskArray = npt.NDArray[np.bool_]

BINARIZE_THRESHOLD = 0.5


def upsample_mask(mask: npt.ArrayLike, roi: Box, xs: np.ndarray, ys: np.ndarray) -> npt.NDArray[np.float64]:
    """Bilinear values of an MxN head mask at image-pixel centers ``xs`` x ``ys``.

    Mask cell (i, j) is centered at ((j + 0.5) / N, (i + 0.5) / M) of the RoI extent;
    positions beyond the outermost cell centers take the border value.
    """
    grid = np.asarray(mask, dtype=np.float64)
    m, n = grid.shape
    u = ((xs + 0.5) - roi.x1) / roi.width * n - 0.5
    v = ((ys + 0.5) - roi.y1) / roi.height * m - 0.5
    u = np.clip(u, 0.0, n - 1.0)
    v = np.clip(v, 0.0, m - 1.0)
    u0 = np.floor(u).astype(np.int64)
    v0 = np.floor(v).astype(np.int64)
    u1 = np.minimum(u0 + 1, n - 1)
    v1 = np.minimum(v0 + 1, m - 1)
    lu = (u - u0)[None, :]
    lv = (v - v0)[:, None]
    top = grid[v0][:, u0] * (1.0 - lu) + grid[v0][:, u1] * lu
    bottom = grid[v1][:, u0] * (1.0 - lu) + grid[v1][:, u1] * lu
    return top * (1.0 - lv) + bottom * lv


def paste_mask(
    mask: npt.ArrayLike,
    roi: Box,
    image_w: int,
    image_h: int,
    threshold: float = BINARIZE_THRESHOLD,
) -> MaskArray:
    """Resize a float head mask to the RoI, binarize at ``threshold`` and place it in an image-sized frame.

    A pixel belongs to the RoI when its center lies inside [x1, x2) x [y1, y2).
    """
    out = np.zeros((image_h, image_w), dtype=bool)
    col_lo = max(0, math.ceil(roi.x1 - 0.5))
    col_hi = min(image_w, math.ceil(roi.x2 - 0.5))
    row_lo = max(0, math.ceil(roi.y1 - 0.5))
    row_hi = min(image_h, math.ceil(roi.y2 - 0.5))
    if col_hi <= col_lo or row_hi <= row_lo:
        return out

    xs = np.arange(col_lo, col_hi, dtype=np.float64)
    ys = np.arange(row_lo, row_hi, dtype=np.float64)
    values = upsample_mask(mask, roi, xs, ys)
    out[row_lo:row_hi, col_lo:col_hi] = values >= threshold
    return out


def mask_iou(a: MaskArray, b: MaskArray) -> float:
    """Pixel IoU; two empty masks count as identical (1.0)."""
    a = np.asarray(a, dtype=bool)
    b = np.asarray(b, dtype=bool)
    if a.shape != b.shape:
        raise ContractError(f"mask_iou needs equal shapes, got {a.shape} and {b.shape}")
    union = int(np.count_nonzero(a | b))
    if union == 0:
        return 1.0
    return int(np.count_nonzero(a & b)) / union
