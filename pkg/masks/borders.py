"""Topological border following on binary masks.

Foreground is 8-connected and background 4-connected. Outer and hole borders are
both followed, because hole borders have to be labeled for the raster scan to
stay correct, but only outer borders become regions. Every foreground pixel is
assigned to its component during the same scan: border pixels through their
border label, interior pixels through the last border seen on their row.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
import numpy.typing as npt

from geometry import Box

from .paste import MaskArray

logger = logging.getLogger(__name__)

# (drow, dcol), clockwise starting east (rows grow downward).
_NEIGHBORS = ((0, 1), (1, 1), (1, 0), (1, -1), (0, -1), (-1, -1), (-1, 0), (-1, 1))
_DIRECTION = {offset: k for k, offset in enumerate(_NEIGHBORS)}
_EAST = 0

_OUTER = True
_HOLE = False


@dataclass(kw_only=True, frozen=True, eq=False)
class Region:
    """One 8-connected foreground component."""

    # Outer border as (x, y) pixel positions in tracing order.
    border: tuple[tuple[int, int], ...]
    box: Box
    pixel_count: int
    # Member pixels inside ``box``, shape (box height, box width).
    crop: MaskArray = field(repr=False)

    def to_mask(self, width: int, height: int) -> MaskArray:
        out = np.zeros((height, width), dtype=bool)
        x1, y1, x2, y2 = (int(v) for v in self.box.as_tuple())
        out[y1:y2, x1:x2] = self.crop
        return out


def _follow(f: list[list[int]], i: int, j: int, i2: int, j2: int, nbd: int) -> list[tuple[int, int]]:
    """Follow one border from (i, j) whose 0-neighbor is (i2, j2); labels pixels in ``f``."""
    start = _DIRECTION[(i2 - i, j2 - j)]
    # Clockwise search for the first nonzero neighbor.
    for step in range(8):
        k = (start + step) % 8
        di, dj = _NEIGHBORS[k]
        if f[i + di][j + dj] != 0:
            i1, j1 = i + di, j + dj
            break
    else:
        f[i][j] = -nbd
        return [(i, j)]

    path = []
    i2, j2 = i1, j1
    i3, j3 = i, j
    while True:
        path.append((i3, j3))
        back = _DIRECTION[(i2 - i3, j2 - j3)]
        east_is_zero = False
        # Counterclockwise from the element after (i2, j2).
        for step in range(1, 9):
            k = (back - step) % 8
            di, dj = _NEIGHBORS[k]
            if f[i3 + di][j3 + dj] != 0:
                i4, j4 = i3 + di, j3 + dj
                break
            if k == _EAST:
                east_is_zero = True
        if east_is_zero:
            f[i3][j3] = -nbd
        elif f[i3][j3] == 1:
            f[i3][j3] = nbd
        if (i4, j4) == (i, j) and (i3, j3) == (i1, j1):
            return path
        i2, j2 = i3, j3
        i3, j3 = i4, j4


def trace_regions(mask: MaskArray) -> list[Region]:
    """Regions in the raster order of their first pixel; each box tightly bounds its pixels."""
    bits = np.asarray(mask, dtype=bool)
    height, width = bits.shape
    if not bits.any():
        return []

    padded = np.zeros((height + 2, width + 2), dtype=np.int64)
    padded[1:-1, 1:-1] = bits
    f = padded.tolist()

    # Border 1 is the frame, a hole border with no parent.
    border_type = {1: _HOLE}
    border_parent = {1: 0}
    component_of = {1: -1}
    borders: list[list[tuple[int, int]]] = []
    members: list[list[tuple[int, int]]] = []
    nbd = 1

    for i in range(1, height + 1):
        row = f[i]
        lnbd = 1
        for j in range(1, width + 1):
            value = row[j]
            if value == 0:
                continue
            if value == 1 and row[j - 1] == 0:
                nbd += 1
                border_type[nbd] = _OUTER
                parent = lnbd if border_type[lnbd] == _HOLE else border_parent[lnbd]
                border_parent[nbd] = parent
                component_of[nbd] = len(borders)
                borders.append(_follow(f, i, j, i, j - 1, nbd))
                members.append([])
            elif value >= 1 and row[j + 1] == 0:
                nbd += 1
                if value > 1:
                    lnbd = value
                border_type[nbd] = _HOLE
                parent = lnbd if border_type[lnbd] == _OUTER else border_parent[lnbd]
                border_parent[nbd] = parent
                component_of[nbd] = component_of[parent]
                _follow(f, i, j, i, j + 1, nbd)

            value = row[j]
            label = abs(value) if value != 1 else lnbd
            members[component_of[label]].append((i - 1, j - 1))
            if value != 1:
                lnbd = abs(value)

    regions = []
    for path, pixels in zip(borders, members, strict=True):
        xs = [p[1] for p in path]
        ys = [p[0] for p in path]
        x1, y1, x2, y2 = min(xs) - 1, min(ys) - 1, max(xs), max(ys)
        crop = np.zeros((y2 - y1, x2 - x1), dtype=bool)
        rows = np.fromiter((p[0] for p in pixels), dtype=np.int64, count=len(pixels))
        cols = np.fromiter((p[1] for p in pixels), dtype=np.int64, count=len(pixels))
        crop[rows - y1, cols - x1] = True
        regions.append(
            Region(
                border=tuple((x - 1, y - 1) for y, x in path),
                box=Box(float(x1), float(y1), float(x2), float(y2)),
                pixel_count=len(pixels),
                crop=crop,
            )
        )
    logger.debug("Traced %d regions in a %dx%d mask", len(regions), width, height)
    return regions


def masks_to_annotations(masks: list[MaskArray]) -> list[tuple[Box, MaskArray]]:
    """(tight box, member crop) for every region of every mask, in mask then scan order."""
    annotations = []
    for mask in masks:
        annotations.extend((region.box, region.crop) for region in trace_regions(mask))
    return annotations


def split_tiles(mask: npt.ArrayLike, n: int) -> list[np.ndarray]:
    """Split into ``n`` side-by-side tiles; the first ``width % n`` tiles are one column wider."""
    arr = np.asarray(mask)
    if n < 1:
        raise ValueError(f"Tile count must be at least 1, got {n}")
    return [np.ascontiguousarray(tile) for tile in np.array_split(arr, n, axis=1)]
