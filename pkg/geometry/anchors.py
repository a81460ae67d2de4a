"""Anchor grids over a feature map.

Anchor (grid_x, grid_y) is centered at (grid_x * stride, grid_y * stride) in image coordinates,
the same cell-center convention RoIAlign uses when it divides image coordinates by the stride.
For scale s and aspect ratio r = w:h the anchor has area
(base_size * s)^2, width base_size * s * sqrt(r) and height base_size * s / sqrt(r).
Anchors are not clipped to the image here.
"""

import logging
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict, Field, field_validator

from errors import ConfigError, ContractError

from .boxes import Box, BoxArray

logger = logging.getLogger(__name__)


class AnchorConfig(BaseModel):
    """Anchor shapes: 16 px base, five scales and three ratios give 15 anchors per location."""

    model_config = ConfigDict(frozen=True)

    base_size: float = Field(default=16.0, gt=0)
    scales: tuple[float, ...] = (1.0, 2.0, 4.0, 8.0, 16.0)
    # width:height, i.e. 1:1, 1:2 and 2:1
    aspect_ratios: tuple[float, ...] = (1.0, 0.5, 2.0)
    feature_stride: float = Field(default=16.0, gt=0)

    @field_validator("scales", "aspect_ratios")
    @classmethod
    def _positive_nonempty(cls, value: tuple[float, ...]) -> tuple[float, ...]:
        if not value:
            raise ValueError("must not be empty")
        if any(v <= 0 for v in value):
            raise ValueError("all entries must be positive")
        return value

    @property
    def anchors_per_location(self) -> int:
        return len(self.scales) * len(self.aspect_ratios)


@dataclass(kw_only=True, frozen=True)
class Anchor:
    box: Box
    scale_index: int
    aspect_index: int
    grid_x: int
    grid_y: int


@dataclass(kw_only=True, frozen=True, eq=False)
class AnchorSet:
    """Anchors in row-major grid order; within a location, scale-major then ratio."""

    boxes: BoxArray
    scale_index: npt.NDArray[np.int64]
    aspect_index: npt.NDArray[np.int64]
    grid_x: npt.NDArray[np.int64]
    grid_y: npt.NDArray[np.int64]
    feat_w: int
    feat_h: int

    def __len__(self) -> int:
        return int(self.boxes.shape[0])

    def __getitem__(self, index: int) -> Anchor:
        return Anchor(
            box=Box(*map(float, self.boxes[index])),
            scale_index=int(self.scale_index[index]),
            aspect_index=int(self.aspect_index[index]),
            grid_x=int(self.grid_x[index]),
            grid_y=int(self.grid_y[index]),
        )

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    @classmethod
    def from_boxes(cls, boxes: BoxArray) -> "AnchorSet":
        """Wrap arbitrary boxes as a flat anchor set (grid indices all zero)."""
        boxes = np.asarray(boxes, dtype=np.float64).reshape(-1, 4)
        zeros = np.zeros(len(boxes), dtype=np.int64)
        return cls(
            boxes=boxes,
            scale_index=zeros,
            aspect_index=zeros.copy(),
            grid_x=zeros.copy(),
            grid_y=zeros.copy(),
            feat_w=len(boxes),
            feat_h=1,
        )


def anchor_shapes(cfg: AnchorConfig) -> npt.NDArray[np.float64]:
    """(K, 2) array of (width, height) per location, scale-major."""
    if not cfg.scales or not cfg.aspect_ratios:
        raise ConfigError("AnchorConfig needs at least one scale and one aspect ratio")
    shapes = []
    for s in cfg.scales:
        side = cfg.base_size * s
        for r in cfg.aspect_ratios:
            root = np.sqrt(r)
            shapes.append((side * root, side / root))
    return np.asarray(shapes, dtype=np.float64)


def generate_anchors(cfg: AnchorConfig, feat_w: int, feat_h: int) -> AnchorSet:
    if feat_w < 1 or feat_h < 1:
        raise ContractError(f"Feature map must be at least 1x1, got {feat_w}x{feat_h}")
    shapes = anchor_shapes(cfg)
    k = len(shapes)

    gy, gx = np.meshgrid(np.arange(feat_h), np.arange(feat_w), indexing="ij")
    cx = (gx.ravel() * cfg.feature_stride)[:, None]
    cy = (gy.ravel() * cfg.feature_stride)[:, None]
    half_w = 0.5 * shapes[None, :, 0]
    half_h = 0.5 * shapes[None, :, 1]
    boxes = np.stack([cx - half_w, cy - half_h, cx + half_w, cy + half_h], axis=-1).reshape(-1, 4)

    n_loc = feat_w * feat_h
    n_ratios = len(cfg.aspect_ratios)
    per_loc = np.arange(k)
    anchors = AnchorSet(
        boxes=boxes,
        scale_index=np.tile(per_loc // n_ratios, n_loc),
        aspect_index=np.tile(per_loc % n_ratios, n_loc),
        grid_x=np.repeat(gx.ravel(), k),
        grid_y=np.repeat(gy.ravel(), k),
        feat_w=feat_w,
        feat_h=feat_h,
    )
    logger.debug("Generated %d anchors (%d per location) on a %dx%d map", len(anchors), k, feat_w, feat_h)
    return anchors
