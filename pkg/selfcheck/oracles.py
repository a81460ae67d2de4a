"""Slow, obviously-correct reference implementations the suites compare against."""

from collections import deque
from collections.abc import Sequence

import numpy as np

from geometry import Box, iou

# ====================================================================
# Geometry
# ====================================================================


def raster_iou(a: Box, b: Box, size: int = 64) -> float:
    """IoU by counting pixels of integer-coordinate boxes on a size x size grid."""
    grid_a = np.zeros((size, size), dtype=bool)
    grid_b = np.zeros((size, size), dtype=bool)
    grid_a[int(a.y1) : int(a.y2), int(a.x1) : int(a.x2)] = True
    grid_b[int(b.y1) : int(b.y2), int(b.x1) : int(b.x2)] = True
    inter = int(np.count_nonzero(grid_a & grid_b))
    union = int(np.count_nonzero(grid_a | grid_b))
    return inter / union


def brute_nms(boxes: Sequence[Box], scores: Sequence[float], iou_threshold: float) -> list[int]:
    """Greedy suppression over all pairs, highest score (then lowest index) first."""
    order = sorted(range(len(boxes)), key=lambda k: (-scores[k], k))
    kept: list[int] = []
    for k in order:
        if all(iou(boxes[k], boxes[j]) <= iou_threshold for j in kept):
            kept.append(k)
    return kept


# ====================================================================
# Masks
# ====================================================================

_NEIGHBORS_8 = [(dy, dx) for dy in (-1, 0, 1) for dx in (-1, 0, 1) if (dy, dx) != (0, 0)]


def flood_fill_components(mask: np.ndarray) -> list[np.ndarray]:
    """8-connected components as full-frame masks, ordered by their first pixel in raster order."""
    grid = np.asarray(mask, dtype=bool)
    h, w = grid.shape
    cells = grid.tolist()
    seen = [[False] * w for _ in range(h)]
    components = []
    for y in range(h):
        for x in range(w):
            if not cells[y][x] or seen[y][x]:
                continue
            component = np.zeros((h, w), dtype=bool)
            queue = deque([(y, x)])
            seen[y][x] = True
            while queue:
                cy, cx = queue.popleft()
                component[cy, cx] = True
                for dy, dx in _NEIGHBORS_8:
                    ny, nx = cy + dy, cx + dx
                    if 0 <= ny < h and 0 <= nx < w and cells[ny][nx] and not seen[ny][nx]:
                        seen[ny][nx] = True
                        queue.append((ny, nx))
            components.append(component)
    return components


def tight_box(component: np.ndarray) -> tuple[float, float, float, float]:
    ys, xs = np.nonzero(component)
    return float(xs.min()), float(ys.min()), float(xs.max() + 1), float(ys.max() + 1)


# ====================================================================
# RoIAlign
# ====================================================================


def bilinear_reference(data: np.ndarray, x: float, y: float, c: int) -> float:
    """Textbook bilinear interpolation with border clamping, one point at a time."""
    h, w = data.shape[:2]
    x = min(max(x, 0.0), w - 1.0)
    y = min(max(y, 0.0), h - 1.0)
    x0, y0 = int(np.floor(x)), int(np.floor(y))
    x1, y1 = min(x0 + 1, w - 1), min(y0 + 1, h - 1)
    fx, fy = x - x0, y - y0
    return float(
        data[y0, x0, c] * (1 - fx) * (1 - fy)
        + data[y0, x1, c] * fx * (1 - fy)
        + data[y1, x0, c] * (1 - fx) * fy
        + data[y1, x1, c] * fx * fy
    )


def _bilinear_points(data: np.ndarray, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Clamped bilinear values at arbitrary point arrays; returns xs.shape + (C,)."""
    h, w = data.shape[:2]
    xs = np.clip(xs, 0.0, w - 1.0)
    ys = np.clip(ys, 0.0, h - 1.0)
    x0 = np.floor(xs).astype(np.int64)
    y0 = np.floor(ys).astype(np.int64)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = (xs - x0)[..., None]
    fy = (ys - y0)[..., None]
    return (
        data[y0, x0] * (1 - fx) * (1 - fy)
        + data[y0, x1] * fx * (1 - fy)
        + data[y1, x0] * (1 - fx) * fy
        + data[y1, x1] * fx * fy
    )


def bin_average(data: np.ndarray, stride: float, roi: Box, out_h: int, out_w: int, density: int = 32) -> np.ndarray:
    """Average of the interpolated map over each bin on a dense regular grid."""
    x1, y1 = roi.x1 / stride, roi.y1 / stride
    bw = (roi.x2 - roi.x1) / stride / out_w
    bh = (roi.y2 - roi.y1) / stride / out_h
    offsets = (np.arange(density) + 0.5) / density
    out = np.zeros((out_h, out_w, data.shape[2]))
    for i in range(out_h):
        for j in range(out_w):
            ys, xs = np.meshgrid(y1 + (i + offsets) * bh, x1 + (j + offsets) * bw, indexing="ij")
            out[i, j] = _bilinear_points(data, xs, ys).mean(axis=(0, 1))
    return out


def roi_align_reference(data: np.ndarray, stride: float, roi: Box, out_h: int, out_w: int, ratio: int) -> np.ndarray:
    """RoIAlign as nested loops over bins, channels and sample points."""
    x1, y1 = roi.x1 / stride, roi.y1 / stride
    bw = (roi.x2 - roi.x1) / stride / out_w
    bh = (roi.y2 - roi.y1) / stride / out_h
    offsets = [(k + 0.5) / ratio for k in range(ratio)]
    out = np.zeros((out_h, out_w, data.shape[2]))
    for i in range(out_h):
        for j in range(out_w):
            for c in range(data.shape[2]):
                total = 0.0
                for oy in offsets:
                    for ox in offsets:
                        total += bilinear_reference(data, x1 + (j + ox) * bw, y1 + (i + oy) * bh, c)
                out[i, j, c] = total / (ratio * ratio)
    return out


# ====================================================================
# Average precision
# ====================================================================


def prefix_average_precision(tp_flags: Sequence[bool], n_gt: int) -> float:
    """All-points AP by enumerating every prefix of the ranked list.

    Each true positive adds 1/n_gt recall at the best precision reached by any prefix at least as long.
    """
    n = len(tp_flags)
    precisions = []
    hits = 0
    for k in range(n):
        hits += int(tp_flags[k])
        precisions.append(hits / (k + 1))
    ap = 0.0
    for k in range(n):
        if tp_flags[k]:
            ap += max(precisions[k:]) / n_gt
    return ap
