"""Ingest GDXray per-series box annotations.

Each series directory (``Castings/C0001`` ...) may hold a ``ground_truth.txt`` with one
whitespace-separated row per defect. The native column order is
``image_index x1 x2 y1 y2``; ``xyxy`` files use ``image_index x1 y1 x2 y2``. Image ids are
``<series>_<index:04d>``, matching GDXray's image file names.
"""

import logging
import math
from pathlib import Path
from typing import Literal

from errors import RecordParseError

from .formats import GroundTruthRecord

logger = logging.getLogger(__name__)

Ordering = Literal["xyxy", "gdxray"]

ANNOTATION_FILENAME = "ground_truth.txt"
CASTING_CLASS = 1


def parse_row(values: list[float], ordering: Ordering) -> tuple[int, tuple[float, float, float, float]]:
    """(image index, (x1, y1, x2, y2)) from one numeric row."""
    if len(values) != 5:
        raise ValueError(f"expected 5 columns, got {len(values)}")
    index, a, b, c, d = values
    if not float(index).is_integer() or index < 0:
        raise ValueError(f"image index must be a non-negative integer, got {index}")
    if ordering == "gdxray":
        box = (a, c, b, d)
    elif ordering == "xyxy":
        box = (a, b, c, d)
    else:
        raise ValueError(f"Unknown ordering: {ordering!r}")
    return int(index), box


def read_series(path: str | Path, ordering: Ordering = "gdxray", series: str | None = None) -> list[GroundTruthRecord]:
    """Rows with inverted or non-finite coordinates are skipped with a warning."""
    path = Path(path)
    series = series or path.parent.name
    records = []
    for line, text in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        text = text.strip()
        if not text or text.startswith("#"):
            continue
        try:
            values = [float(v) for v in text.replace(",", " ").split()]
            index, (x1, y1, x2, y2) = parse_row(values, ordering)
        except ValueError as exc:
            raise RecordParseError(str(path), line, str(exc)) from exc
        if not all(math.isfinite(v) for v in (x1, y1, x2, y2)) or x2 <= x1 or y2 <= y1:
            logger.warning(
                "%s:%d: rejected box (%g, %g, %g, %g) after %s reordering", path, line, x1, y1, x2, y2, ordering
            )
            continue
        records.append(
            GroundTruthRecord(
                image_id=f"{series}_{index:04d}", class_id=CASTING_CLASS, x1=x1, y1=y1, x2=x2, y2=y2
            )
        )
    return records


def ingest_gdxray(src_dir: str | Path, ordering: Ordering = "gdxray") -> list[GroundTruthRecord]:
    """Collect every series below ``src_dir`` in path order; file row order is preserved."""
    root = Path(src_dir)
    files = sorted(root.rglob(ANNOTATION_FILENAME))
    records = []
    for path in files:
        series_records = read_series(path, ordering)
        logger.debug("Series %s: %d boxes", path.parent.name, len(series_records))
        records.extend(series_records)
    logger.info("Ingested %d boxes from %d series under %s", len(records), len(files), root)
    return records
