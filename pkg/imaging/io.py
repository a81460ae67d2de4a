"""Grayscale PNG reading and writing."""

from pathlib import Path
from typing import Literal

import numpy as np
import numpy.typing as npt
from PIL import Image

from .image import GrayImage


def read_png(path: str | Path) -> GrayImage:
    """8- or 16-bit grayscale PNG as float64; color images are converted to luminance."""
    with Image.open(path) as img:
        if img.mode in ("I;16", "I;16B", "I;16L", "I"):
            return np.asarray(img, dtype=np.float64)
        if img.mode != "L":
            img = img.convert("L")
        return np.asarray(img, dtype=np.float64)


def write_png(path: str | Path, image: GrayImage, bit_depth: Literal[8, 16] = 8) -> None:
    """Round and clip to the bit depth's range before writing."""
    if bit_depth == 8:
        arr = np.clip(np.round(image), 0, 255).astype(np.uint8)
    elif bit_depth == 16:
        arr = np.clip(np.round(image), 0, 65535).astype(np.uint16)
    else:
        raise ValueError(f"Unsupported bit depth: {bit_depth}")
    Image.fromarray(arr).save(path, format="PNG")


def read_mask_png(path: str | Path) -> npt.NDArray[np.bool_]:
    """Any nonzero pixel is foreground."""
    return read_png(path) > 0


def write_mask_png(path: str | Path, mask: npt.NDArray[np.bool_]) -> None:
    write_png(path, np.asarray(mask, dtype=np.float64) * 255.0)
