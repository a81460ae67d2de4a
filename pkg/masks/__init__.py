"""Mask pasting, mask IoU, border following and the RLE mask codec."""

from .borders import Region, masks_to_annotations, split_tiles, trace_regions
from .paste import BINARIZE_THRESHOLD, MaskArray, mask_iou, paste_mask, upsample_mask
from .rle import RunLengthMask, decode_rle, dumps_rle, encode_rle, loads_rle, read_rle, write_rle

__all__ = [
    "BINARIZE_THRESHOLD",
    "MaskArray",
    "Region",
    "RunLengthMask",
    "decode_rle",
    "dumps_rle",
    "encode_rle",
    "loads_rle",
    "mask_iou",
    "masks_to_annotations",
    "paste_mask",
    "read_rle",
    "split_tiles",
    "trace_regions",
    "upsample_mask",
    "write_rle",
]
