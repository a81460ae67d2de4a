"""RoIAlign over dense feature maps."""

from .align import (
    BOX_HEAD,
    MASK_HEAD,
    AlignConfig,
    FeatureMap,
    bilinear_sample,
    roi_align,
    roi_align_many,
    sample_positions,
)

__all__ = [
    "BOX_HEAD",
    "MASK_HEAD",
    "AlignConfig",
    "FeatureMap",
    "bilinear_sample",
    "roi_align",
    "roi_align_many",
    "sample_positions",
]
