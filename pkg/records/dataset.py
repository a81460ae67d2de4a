"""Dataset directories and conversion between file rows and in-memory types.

A dataset directory holds ``images/<image_id>.png``, ``masks/<image_id>_<k>.rle`` and a
``ground_truth.csv`` whose mask column points at the RLE files.
"""

import logging
from collections import defaultdict
from pathlib import Path
from typing import Literal

import numpy as np

from errors import ContractError
from evaluation import Detection, GroundTruth
from imaging import AnnotatedImage, Annotation, read_png, write_png
from masks import read_rle, write_rle

from .formats import DetectionRecord, GroundTruthRecord, read_ground_truth, write_ground_truth

logger = logging.getLogger(__name__)

GT_FILENAME = "ground_truth.csv"
IMAGES_DIR = "images"
MASKS_DIR = "masks"


def _load_mask(base_dir: Path, ref: str | None) -> np.ndarray | None:
    if ref is None:
        return None
    path = Path(ref)
    return read_rle(path if path.is_absolute() else base_dir / path)


def to_ground_truths(records: list[GroundTruthRecord], base_dir: str | Path = ".") -> list[GroundTruth]:
    """Resolve mask references relative to ``base_dir``."""
    base = Path(base_dir)
    return [
        GroundTruth(image_id=r.image_id, class_id=r.class_id, box=r.to_box(), mask=_load_mask(base, r.mask))
        for r in records
    ]


def to_detections(records: list[DetectionRecord], base_dir: str | Path = ".") -> list[Detection]:
    base = Path(base_dir)
    return [
        Detection(
            image_id=r.image_id,
            class_id=r.class_id,
            score=r.score,
            box=r.to_box(),
            mask=_load_mask(base, r.mask),
        )
        for r in records
    ]


def write_dataset(
    items: list[AnnotatedImage], out_dir: str | Path, *, bit_depth: Literal[8, 16] = 8
) -> list[GroundTruthRecord]:
    """Write images, RLE masks and the ground-truth CSV; returns the rows written."""
    out = Path(out_dir)
    (out / IMAGES_DIR).mkdir(parents=True, exist_ok=True)
    records = []
    for item in items:
        write_png(out / IMAGES_DIR / f"{item.image_id}.png", item.image, bit_depth)
        for k, ann in enumerate(item.annotations):
            mask_ref = None
            if ann.mask is not None:
                (out / MASKS_DIR).mkdir(exist_ok=True)
                mask_ref = f"{MASKS_DIR}/{item.image_id}_{k}.rle"
                write_rle(out / mask_ref, ann.mask)
            x1, y1, x2, y2 = ann.box.as_tuple()
            records.append(
                GroundTruthRecord(
                    image_id=item.image_id, class_id=ann.class_id, x1=x1, y1=y1, x2=x2, y2=y2, mask=mask_ref
                )
            )
    write_ground_truth(out / GT_FILENAME, records)
    logger.info("Wrote %d images and %d annotations to %s", len(items), len(records), out)
    return records


def load_dataset(data_dir: str | Path) -> list[AnnotatedImage]:
    """Read a dataset directory back; images without annotations are kept."""
    root = Path(data_dir)
    records = read_ground_truth(root / GT_FILENAME)
    by_image: dict[str, list[GroundTruthRecord]] = defaultdict(list)
    for r in records:
        by_image[r.image_id].append(r)

    image_ids = sorted({p.stem for p in (root / IMAGES_DIR).glob("*.png")} | set(by_image))
    items = []
    for image_id in image_ids:
        image_path = root / IMAGES_DIR / f"{image_id}.png"
        if not image_path.exists():
            raise ContractError(f"{root / GT_FILENAME} references {image_id} but {image_path} is missing")
        annotations = tuple(
            Annotation(box=r.to_box(), class_id=r.class_id, mask=_load_mask(root, r.mask)) for r in by_image[image_id]
        )
        items.append(AnnotatedImage(image_id=image_id, image=read_png(image_path), annotations=annotations))
    logger.debug("Loaded %d images from %s", len(items), root)
    return items


def echo_detections(records: list[GroundTruthRecord], score: float = 1.0) -> list[DetectionRecord]:
    """Ground truth restated as detections, the perfect-detector baseline."""
    return [DetectionRecord(score=score, **r.model_dump()) for r in records]
