"""File formats and dataset plumbing for the command line."""

from .dataset import (
    GT_FILENAME,
    IMAGES_DIR,
    MASKS_DIR,
    echo_detections,
    load_dataset,
    to_detections,
    to_ground_truths,
    write_dataset,
)
from .formats import (
    GT_HEADER,
    DetectionRecord,
    GroundTruthRecord,
    read_detections,
    read_ground_truth,
    write_detections,
    write_ground_truth,
)
from .gdxray import Ordering, ingest_gdxray, parse_row, read_series
from .welds import DEFAULT_TILES, masks_to_records, tile_annotations

__all__ = [
    "DEFAULT_TILES",
    "GT_FILENAME",
    "GT_HEADER",
    "IMAGES_DIR",
    "MASKS_DIR",
    "DetectionRecord",
    "GroundTruthRecord",
    "Ordering",
    "echo_detections",
    "ingest_gdxray",
    "load_dataset",
    "masks_to_records",
    "parse_row",
    "read_detections",
    "read_ground_truth",
    "read_series",
    "tile_annotations",
    "to_detections",
    "to_ground_truths",
    "write_dataset",
    "write_detections",
    "write_ground_truth",
]
