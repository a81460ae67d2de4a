"""Training-time augmentations: flips, Gaussian blur, Gaussian noise and random crops."""

import logging
import math
from dataclasses import replace

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict, Field
from scipy.ndimage import correlate1d

from errors import ContractError

from .image import AnnotatedImage, GrayImage, flip, mask_extent

logger = logging.getLogger(__name__)

# A cropped box survives when at least this share of its area stays inside the window.
CROP_KEEP_FRACTION = 0.25


class AugmentSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    horizontal_flip: bool = True
    vertical_flip: bool = True
    gaussian_blur: bool = False
    gaussian_noise: bool = False
    random_crop: bool = False
    flip_probability: float = Field(default=0.5, ge=0.0, le=1.0)
    blur_sigma: float = Field(default=1.0, gt=0.0)
    noise_fraction: float = Field(default=0.05, ge=0.0)
    crop_fraction: float = Field(default=0.8, gt=0.0, le=1.0)
    seed: int = 0


def gaussian_kernel(sigma: float) -> npt.NDArray[np.float64]:
    """Sampled Gaussian on [-ceil(3 sigma), ceil(3 sigma)], normalized to sum 1."""
    if sigma <= 0:
        raise ContractError(f"Blur sigma must be positive, got {sigma}")
    radius = math.ceil(3.0 * sigma)
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    kernel = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return kernel / kernel.sum()


def gaussian_blur(img: GrayImage, sigma: float = 1.0) -> GrayImage:
    """Separable Gaussian blur with reflected borders."""
    kernel = gaussian_kernel(sigma)
    img = np.asarray(img, dtype=np.float64)
    # Offset by the minimum so flat images come back unchanged.
    base = img.min()
    out = correlate1d(img - base, kernel, axis=0, mode="reflect")
    out = correlate1d(out, kernel, axis=1, mode="reflect")
    return out + base


def noise_sigma(img: GrayImage, fraction: float = 0.05) -> float:
    """Noise standard deviation: ``fraction`` of the darkest-to-lightest pixel range."""
    img = np.asarray(img, dtype=np.float64)
    return float(fraction * (img.max() - img.min()))


def gaussian_noise(img: GrayImage, fraction: float = 0.05, seed: int | None = 0) -> GrayImage:
    """Add zero-mean Gaussian noise and clip back to the original range."""
    if fraction < 0:
        raise ContractError(f"Noise fraction must be non-negative, got {fraction}")
    img = np.asarray(img, dtype=np.float64)
    sigma = noise_sigma(img, fraction)
    if sigma == 0.0:
        return img.copy()
    noise = np.random.default_rng(seed).normal(0.0, sigma, size=img.shape)
    return np.clip(img + noise, img.min(), img.max())


def random_crop(item: AnnotatedImage, crop_fraction: float, seed: int | None = 0) -> AnnotatedImage:
    """Crop a uniformly placed window whose sides are ``crop_fraction`` of the image's."""
    if not 0.0 < crop_fraction <= 1.0:
        raise ContractError(f"Crop fraction must lie in (0, 1], got {crop_fraction}")
    h, w = item.image.shape
    cw = max(1, int(round(w * crop_fraction)))
    ch = max(1, int(round(h * crop_fraction)))
    rng = np.random.default_rng(seed)
    x0 = int(rng.integers(0, w - cw + 1))
    y0 = int(rng.integers(0, h - ch + 1))

    annotations = []
    for ann in item.annotations:
        clipped = ann.box.translate(-x0, -y0).clip(cw, ch)
        if clipped is None or clipped.area < CROP_KEEP_FRACTION * ann.box.area:
            continue
        mask = None
        if ann.mask is not None:
            mask = np.ascontiguousarray(ann.mask[y0 : y0 + ch, x0 : x0 + cw])
            # The box follows the cropped mask; a defect cut out of the window is dropped.
            clipped = mask_extent(mask)
            if clipped is None:
                continue
        annotations.append(replace(ann, box=clipped, mask=mask))

    image = np.ascontiguousarray(item.image[y0 : y0 + ch, x0 : x0 + cw])
    dropped = len(item.annotations) - len(annotations)
    if dropped:
        logger.debug("Crop of %s at (%d, %d) dropped %d annotations", item.image_id, x0, y0, dropped)
    return AnnotatedImage(image_id=item.image_id, image=image, annotations=tuple(annotations))


def augment(item: AnnotatedImage, spec: AugmentSpec, *, training: bool = True, index: int = 0) -> AnnotatedImage:
    """Apply the enabled augmentations; evaluation (``training=False``) returns the input untouched.

    Randomness derives from ``(spec.seed, index)`` so results do not depend on processing order.
    """
    if not training:
        return item
    rng = np.random.default_rng([spec.seed, index])
    out = item
    if spec.horizontal_flip and rng.random() < spec.flip_probability:
        out = flip(out, "horizontal")
    if spec.vertical_flip and rng.random() < spec.flip_probability:
        out = flip(out, "vertical")
    if spec.random_crop:
        out = random_crop(out, spec.crop_fraction, seed=int(rng.integers(2**32)))
    if spec.gaussian_blur:
        out = replace(out, image=gaussian_blur(out.image, spec.blur_sigma))
    if spec.gaussian_noise:
        out = replace(out, image=gaussian_noise(out.image, spec.noise_fraction, seed=int(rng.integers(2**32))))
    return out
