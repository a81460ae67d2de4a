"""Synthetic X-ray-like casting images with dark blob defects and exact labels."""

import logging
from collections.abc import Sequence
from typing import TypeVar

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from geometry import Box
from masks import trace_regions

from .image import AnnotatedImage, Annotation, GrayImage

logger = logging.getLogger(__name__)

T = TypeVar("T")


class SynthSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    width: int = Field(default=256, ge=64)
    height: int = Field(default=256, ge=64)
    min_defects: int = Field(default=1, ge=0)
    max_defects: int = Field(default=4, ge=0)
    # Defects are sized around 20x20 px, the typical casting defect scale.
    mean_diameter: float = Field(default=20.0, gt=0)
    diameter_jitter: float = Field(default=4.0, ge=0)
    min_depth: float = Field(default=40.0, gt=0)
    max_depth: float = Field(default=70.0, gt=0)
    background_level: float = Field(default=140.0, ge=0)
    background_amplitude: float = Field(default=15.0, ge=0)
    irregularity: float = Field(default=0.15, ge=0, lt=0.5)
    n_classes: int = Field(default=1, ge=1)

    @model_validator(mode="after")
    def _ranges(self) -> "SynthSpec":
        if self.max_defects < self.min_defects:
            raise ValueError("max_defects must be >= min_defects")
        if self.max_depth < self.min_depth:
            raise ValueError("max_depth must be >= min_depth")
        return self


def _background(spec: SynthSpec, rng: np.random.Generator) -> GrayImage:
    """Smooth low-frequency field: a few long-period cosines around a base level."""
    ys, xs = np.mgrid[0 : spec.height, 0 : spec.width].astype(np.float64)
    field = np.full((spec.height, spec.width), spec.background_level)
    terms = 3
    for _ in range(terms):
        period = rng.uniform(192.0, 512.0)
        angle = rng.uniform(0.0, np.pi)
        phase = rng.uniform(0.0, 2 * np.pi)
        proj = xs * np.cos(angle) + ys * np.sin(angle)
        field += (spec.background_amplitude / terms) * np.cos(2 * np.pi * proj / period + phase)
    return field


def _blob(spec: SynthSpec, rng: np.random.Generator, cx: float, cy: float, diameter: float):
    """Rasterize an irregular ellipse; returns (mask, normalized radius) over the full frame."""
    aspect = rng.uniform(0.7, 1.4)
    rx = 0.5 * diameter * np.sqrt(aspect)
    ry = 0.5 * diameter / np.sqrt(aspect)
    theta = rng.uniform(0.0, np.pi)
    lobes = int(rng.integers(2, 4))
    lobe_phase = rng.uniform(0.0, 2 * np.pi)

    ys, xs = np.mgrid[0 : spec.height, 0 : spec.width].astype(np.float64)
    dx, dy = xs + 0.5 - cx, ys + 0.5 - cy
    u = (dx * np.cos(theta) + dy * np.sin(theta)) / rx
    v = (-dx * np.sin(theta) + dy * np.cos(theta)) / ry
    rho = np.hypot(u, v)
    limit = 1.0 + spec.irregularity * np.cos(lobes * np.arctan2(v, u) + lobe_phase)
    return rho <= limit, rho / limit


def synth_image(spec: SynthSpec, rng: np.random.Generator, image_id: str) -> AnnotatedImage:
    image = _background(spec, rng)
    occupied = np.zeros((spec.height, spec.width), dtype=bool)
    annotations = []

    n_defects = int(rng.integers(spec.min_defects, spec.max_defects + 1))
    for _ in range(n_defects):
        for _attempt in range(50):
            diameter = float(np.clip(rng.normal(spec.mean_diameter, spec.diameter_jitter), 8.0, 40.0))
            margin = diameter + 4.0
            cx = rng.uniform(margin, spec.width - margin)
            cy = rng.uniform(margin, spec.height - margin)
            raw, radius = _blob(spec, rng, cx, cy, diameter)
            if not raw.any():
                continue
            # Keep one 8-connected piece so the label is a single region.
            region = max(trace_regions(raw), key=lambda r: r.pixel_count)
            mask = region.to_mask(spec.width, spec.height)
            x1, y1, x2, y2 = (int(v) for v in region.box.as_tuple())
            if occupied[max(0, y1 - 2) : y2 + 2, max(0, x1 - 2) : x2 + 2].any():
                continue
            depth = rng.uniform(spec.min_depth, spec.max_depth)
            profile = 0.7 + 0.3 * np.clip(1.0 - radius[mask], 0.0, 1.0)
            image[mask] -= depth * profile
            occupied |= mask
            class_id = int(rng.integers(1, spec.n_classes + 1))
            annotations.append(Annotation(box=Box(*map(float, region.box.as_tuple())), class_id=class_id, mask=mask))
            break

    image = np.clip(image, 0.0, 255.0)
    return AnnotatedImage(image_id=image_id, image=image, annotations=tuple(annotations))


def synth_dataset(n_images: int, spec: SynthSpec | None = None, seed: int = 0) -> list[AnnotatedImage]:
    """Deterministic per seed; image ``i`` draws from its own generator seeded with ``(seed, i)``."""
    if n_images < 1:
        raise ValueError(f"n_images must be at least 1, got {n_images}")
    spec = spec or SynthSpec()
    dataset = [
        synth_image(spec, np.random.default_rng([seed, index]), f"synth_{index:04d}") for index in range(n_images)
    ]
    logger.info(
        "Synthesized %d images with %d defects", n_images, sum(len(item.annotations) for item in dataset)
    )
    return dataset


def train_test_split(items: Sequence[T], test_fraction: float = 0.2, seed: int = 0) -> tuple[list[T], list[T]]:
    """Random split; both halves keep the input order."""
    if not 0.0 <= test_fraction <= 1.0:
        raise ValueError(f"test_fraction must lie in [0, 1], got {test_fraction}")
    n_test = int(round(len(items) * test_fraction))
    chosen = set(np.random.default_rng(seed).permutation(len(items))[:n_test].tolist())
    train = [item for i, item in enumerate(items) if i not in chosen]
    test = [item for i, item in enumerate(items) if i in chosen]
    return train, test
