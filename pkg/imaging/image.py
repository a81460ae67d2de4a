"""Annotated grayscale images and the geometric preprocessing around them."""

import logging
from dataclasses import dataclass, field, replace
from typing import Literal

import numpy as np
import numpy.typing as npt
from PIL import Image

from errors import ContractError
from geometry import Box

logger = logging.getLogger(__name__)

GrayImage = npt.NDArray[np.float64]
FlipAxis = Literal["horizontal", "vertical"]

TARGET_SIZE = 768


def mask_extent(mask: npt.ArrayLike) -> Box | None:
    """Tight half-open box around the set pixels, or None for an empty mask."""
    arr = np.asarray(mask, dtype=bool)
    cols = np.flatnonzero(arr.any(axis=0))
    if len(cols) == 0:
        return None
    rows = np.flatnonzero(arr.any(axis=1))
    return Box(float(cols[0]), float(rows[0]), float(cols[-1] + 1), float(rows[-1] + 1))


@dataclass(kw_only=True, frozen=True, eq=False)
class Annotation:
    box: Box
    class_id: int = 1
    # Full-frame member mask, same shape as the image.
    mask: npt.NDArray[np.bool_] | None = field(default=None, repr=False)


@dataclass(kw_only=True, frozen=True, eq=False)
class AnnotatedImage:
    image_id: str
    image: GrayImage = field(repr=False)
    annotations: tuple[Annotation, ...] = ()

    def __post_init__(self):
        image = np.asarray(self.image, dtype=np.float64)
        if image.ndim != 2 or min(image.shape) < 1:
            raise ContractError(f"{self.image_id}: expected a 2-D grayscale image, got shape {image.shape}")
        if not np.all(np.isfinite(image)):
            raise ContractError(f"{self.image_id}: image contains non-finite values")
        object.__setattr__(self, "image", image)
        object.__setattr__(self, "annotations", tuple(self.annotations))
        h, w = image.shape
        for ann in self.annotations:
            b = ann.box
            if b.x1 < 0 or b.y1 < 0 or b.x2 > w or b.y2 > h:
                raise ContractError(f"{self.image_id}: box {b.as_tuple()} lies outside the {w}x{h} image")
            if ann.mask is not None and ann.mask.shape != image.shape:
                raise ContractError(f"{self.image_id}: mask shape {ann.mask.shape} differs from image {image.shape}")

    @property
    def width(self) -> int:
        return self.image.shape[1]

    @property
    def height(self) -> int:
        return self.image.shape[0]

    @property
    def boxes(self) -> list[Box]:
        return [a.box for a in self.annotations]

    @property
    def has_masks(self) -> bool:
        return bool(self.annotations) and all(a.mask is not None for a in self.annotations)


@dataclass(kw_only=True, frozen=True)
class ScaleRecord:
    """How an image was mapped onto the padded square canvas."""

    scale: float
    original_w: int
    original_h: int
    content_w: int
    content_h: int
    target: int

    def to_resized(self, box: Box) -> Box:
        return box.scale(self.scale)

    def to_original(self, box: Box) -> Box:
        return box.scale(1.0 / self.scale)


def _resize_image(image: GrayImage, width: int, height: int) -> GrayImage:
    resized = Image.fromarray(image.astype(np.float32)).resize((width, height), Image.Resampling.BILINEAR)
    return np.asarray(resized, dtype=np.float64)


def _resize_mask(mask: npt.NDArray[np.bool_], width: int, height: int) -> npt.NDArray[np.bool_]:
    resized = Image.fromarray(mask.astype(np.uint8) * 255).resize((width, height), Image.Resampling.NEAREST)
    return np.asarray(resized) > 127


def resize_and_pad(
    item: AnnotatedImage, target: int = TARGET_SIZE, *, upscale: bool = False
) -> tuple[AnnotatedImage, ScaleRecord]:
    """Scale so the longest edge is at most ``target`` and pad right/bottom with black to target x target.

    Images already within ``target`` are only padded unless ``upscale`` is set.
    """
    h, w = item.image.shape
    longest = max(w, h)
    scale = target / longest if (longest > target or upscale) else 1.0
    content_w = min(target, int(round(w * scale)))
    content_h = min(target, int(round(h * scale)))

    content = item.image if scale == 1.0 else _resize_image(item.image, content_w, content_h)
    canvas = np.zeros((target, target), dtype=np.float64)
    canvas[:content_h, :content_w] = content

    annotations = []
    for ann in item.annotations:
        box = ann.box.scale(scale)
        box = Box(box.x1, box.y1, min(box.x2, float(target)), min(box.y2, float(target)))
        mask = None
        if ann.mask is not None:
            mask = np.zeros((target, target), dtype=bool)
            mask[:content_h, :content_w] = ann.mask if scale == 1.0 else _resize_mask(ann.mask, content_w, content_h)
            # Nearest sampling can shift the mask edge by a pixel; the box follows the mask.
            box = mask_extent(mask) or box
        annotations.append(replace(ann, box=box, mask=mask))

    record = ScaleRecord(
        scale=scale, original_w=w, original_h=h, content_w=content_w, content_h=content_h, target=target
    )
    logger.debug("Resized %s from %dx%d by %.4f and padded to %d", item.image_id, w, h, scale, target)
    return AnnotatedImage(image_id=item.image_id, image=canvas, annotations=tuple(annotations)), record


def flip_box(box: Box, axis: FlipAxis, width: int, height: int) -> Box:
    if axis == "horizontal":
        return Box(width - box.x2, box.y1, width - box.x1, box.y2)
    return Box(box.x1, height - box.y2, box.x2, height - box.y1)


def flip(item: AnnotatedImage, axis: FlipAxis) -> AnnotatedImage:
    if axis not in ("horizontal", "vertical"):
        raise ValueError(f"Unknown flip axis: {axis!r}")
    np_axis = 1 if axis == "horizontal" else 0
    h, w = item.image.shape
    annotations = tuple(
        replace(
            ann,
            box=flip_box(ann.box, axis, w, h),
            mask=None if ann.mask is None else np.ascontiguousarray(np.flip(ann.mask, axis=np_axis)),
        )
        for ann in item.annotations
    )
    image = np.ascontiguousarray(np.flip(item.image, axis=np_axis))
    return AnnotatedImage(image_id=item.image_id, image=image, annotations=annotations)
