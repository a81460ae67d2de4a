"""Quantization-free RoI feature cropping.

Feature cell (i, j) has its center at (x=j, y=i) in feature coordinates, and an
image coordinate maps to feature coordinates by dividing by the feature stride.
Samples outside the map take the nearest border value.
"""

from dataclasses import dataclass

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict, Field

from errors import ContractError, DomainError
from geometry import Box


@dataclass(kw_only=True, frozen=True, eq=False)
class FeatureMap:
    """Dense (height, width, channels) features."""

    data: npt.NDArray[np.float64]
    stride: float = 16.0

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim == 2:
            data = data[:, :, None]
        if data.ndim != 3 or min(data.shape) < 1:
            raise ContractError(f"Feature map must be HxWxC with every dimension >= 1, got {data.shape}")
        if not np.all(np.isfinite(data)):
            raise ContractError("Feature map contains non-finite values")
        if self.stride <= 0:
            raise ContractError(f"Feature stride must be positive, got {self.stride}")
        object.__setattr__(self, "data", data)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]


class AlignConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    out_h: int = Field(default=7, ge=1)
    out_w: int = Field(default=7, ge=1)
    # Samples per bin along each axis; 2 gives the 2x2 pattern at bin quarter points.
    sampling_ratio: int = Field(default=2, ge=1)

    @property
    def samples_per_bin(self) -> int:
        return self.sampling_ratio * self.sampling_ratio


BOX_HEAD = AlignConfig(out_h=7, out_w=7)
MASK_HEAD = AlignConfig(out_h=14, out_w=14)


def _interpolate(data: np.ndarray, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Bilinear values on the outer grid ys x xs; returns (len(ys), len(xs), C)."""
    h, w = data.shape[:2]
    xs = np.clip(xs, 0.0, w - 1.0)
    ys = np.clip(ys, 0.0, h - 1.0)
    x0 = np.floor(xs).astype(np.int64)
    y0 = np.floor(ys).astype(np.int64)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    lx = (xs - x0)[None, :, None]
    ly = (ys - y0)[:, None, None]

    top = data[y0][:, x0] * (1.0 - lx) + data[y0][:, x1] * lx
    bottom = data[y1][:, x0] * (1.0 - lx) + data[y1][:, x1] * lx
    return top * (1.0 - ly) + bottom * ly


def bilinear_sample(fm: FeatureMap, x: float, y: float, c: int = 0) -> float:
    """Bilinear value of channel ``c`` at feature coordinates (x, y)."""
    return float(_interpolate(fm.data[:, :, c : c + 1], np.array([x], dtype=np.float64), np.array([y]))[0, 0, 0])


def sample_positions(start: float, length: float, bins: int, ratio: int) -> npt.NDArray[np.float64]:
    """Regularly spaced sample coordinates, ``ratio`` per bin, at bin sub-cell centers."""
    bin_size = length / bins
    offsets = (np.arange(ratio, dtype=np.float64) + 0.5) / ratio
    return start + (np.arange(bins, dtype=np.float64)[:, None] + offsets[None, :]).ravel() * bin_size


def roi_align(fm: FeatureMap, roi: Box, cfg: AlignConfig | None = None) -> npt.NDArray[np.float64]:
    """Average ``sampling_ratio``^2 bilinear samples per bin; output is (out_h, out_w, C)."""
    cfg = cfg or BOX_HEAD
    if roi.x2 <= roi.x1 or roi.y2 <= roi.y1:
        raise DomainError(f"Degenerate RoI: {roi}")
    x1, y1 = roi.x1 / fm.stride, roi.y1 / fm.stride
    roi_w, roi_h = (roi.x2 - roi.x1) / fm.stride, (roi.y2 - roi.y1) / fm.stride

    r = cfg.sampling_ratio
    xs = sample_positions(x1, roi_w, cfg.out_w, r)
    ys = sample_positions(y1, roi_h, cfg.out_h, r)
    samples = _interpolate(fm.data, xs, ys)
    return samples.reshape(cfg.out_h, r, cfg.out_w, r, fm.channels).mean(axis=(1, 3))


def roi_align_many(fm: FeatureMap, rois: list[Box], cfg: AlignConfig | None = None) -> npt.NDArray[np.float64]:
    """Stacked outputs, shape (len(rois), out_h, out_w, C)."""
    cfg = cfg or BOX_HEAD
    if not rois:
        return np.zeros((0, cfg.out_h, cfg.out_w, fm.channels), dtype=np.float64)
    return np.stack([roi_align(fm, roi, cfg) for roi in rois])
