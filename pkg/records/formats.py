"""Ground-truth CSV and detection JSON-lines files.

Ground truth is a comma-separated file with the header
``image_id,class_id,x1,y1,x2,y2,mask``; ``mask`` is empty or a path to an RLE sidecar,
relative to the directory holding the CSV. Detections hold one JSON object per line with
the keys ``image_id, class_id, score, x1, y1, x2, y2, mask``.
"""

import csv
import logging
import math
from pathlib import Path

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from errors import RecordParseError
from geometry import Box

logger = logging.getLogger(__name__)

GT_HEADER = ("image_id", "class_id", "x1", "y1", "x2", "y2", "mask")


class _BoxRecord(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    image_id: str = Field(min_length=1)
    class_id: int = Field(ge=0)

    @field_validator("image_id")
    @classmethod
    def _plain_id(cls, v: str) -> str:
        if v != v.strip() or "," in v or "\n" in v:
            raise ValueError(f"image_id must not contain commas, newlines or surrounding blanks: {v!r}")
        return v

    @field_validator("mask", mode="before", check_fields=False)
    @classmethod
    def _empty_mask(cls, v):
        return v or None

    @model_validator(mode="after")
    def _valid_box(self):
        coords = (self.x1, self.y1, self.x2, self.y2)
        if not all(math.isfinite(c) for c in coords):
            raise ValueError(f"box coordinates must be finite, got {coords}")
        if self.x2 <= self.x1 or self.y2 <= self.y1:
            raise ValueError(f"box must satisfy x2 > x1 and y2 > y1, got {coords}")
        return self

    def to_box(self) -> Box:
        return Box(self.x1, self.y1, self.x2, self.y2)


class GroundTruthRecord(_BoxRecord):
    x1: float
    y1: float
    x2: float
    y2: float
    mask: str | None = None


class DetectionRecord(_BoxRecord):
    score: float = Field(ge=0.0, le=1.0)
    x1: float
    y1: float
    x2: float
    y2: float
    mask: str | None = None


def _format_float(v: float) -> str:
    # repr round-trips exactly; integral values print without a trailing ".0".
    return str(int(v)) if v.is_integer() else repr(v)


def _parse_error(path: Path, line: int, exc: Exception) -> RecordParseError:
    if isinstance(exc, ValidationError):
        detail = "; ".join(
            f"{'.'.join(str(p) for p in err['loc']) or 'row'}: {err['msg']}" for err in exc.errors()
        )
    else:
        detail = str(exc)
    return RecordParseError(str(path), line, detail)


# ====================================================================
# Ground truth
# ====================================================================


def write_ground_truth(path: str | Path, records: list[GroundTruthRecord]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(GT_HEADER)
        for r in records:
            writer.writerow(
                [r.image_id, r.class_id, *(_format_float(c) for c in (r.x1, r.y1, r.x2, r.y2)), r.mask or ""]
            )
    logger.debug("Wrote %d ground-truth rows to %s", len(records), path)
    return path


def read_ground_truth(path: str | Path) -> list[GroundTruthRecord]:
    """Parse a ground-truth CSV; any bad row raises RecordParseError naming its line."""
    path = Path(path)
    records = []
    with open(path, encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != GT_HEADER:
            raise RecordParseError(str(path), 1, f"expected header {','.join(GT_HEADER)}")
        for row in reader:
            line = reader.line_num
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(GT_HEADER):
                raise RecordParseError(str(path), line, f"expected {len(GT_HEADER)} columns, got {len(row)}")
            try:
                records.append(GroundTruthRecord(**dict(zip(GT_HEADER, (cell.strip() for cell in row)))))
            except ValidationError as exc:
                raise _parse_error(path, line, exc) from exc
    logger.debug("Read %d ground-truth rows from %s", len(records), path)
    return records


# ====================================================================
# Detections
# ====================================================================


def write_detections(path: str | Path, records: list[DetectionRecord]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        for r in records:
            f.write(r.model_dump_json())
            f.write("\n")
    return path


def read_detections(path: str | Path) -> list[DetectionRecord]:
    path = Path(path)
    records = []
    with open(path, encoding="utf-8") as f:
        for line, text in enumerate(f, start=1):
            if not text.strip():
                continue
            try:
                records.append(DetectionRecord.model_validate_json(text))
            except ValidationError as exc:
                raise _parse_error(path, line, exc) from exc
    logger.debug("Read %d detections from %s", len(records), path)
    return records
