"""Evaluation driver and report output."""

import json
import logging
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field

from errors import ContractError

from .matching import Detection, GroundTruth, MatchMode, MatchRecord, match_detections
from .precision import Interpolation, average_precision, precision_recall

logger = logging.getLogger(__name__)

EvalMode = Literal["bbox", "mask", "both"]


class EvalConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    iou_threshold: float = Field(default=0.5, gt=0.0, le=1.0)
    interpolation: Interpolation = "all_points"
    mode: EvalMode = "both"
    # Require overlap strictly above the threshold instead of at-or-above.
    strict_iou: bool = False


@dataclass(kw_only=True, frozen=True)
class ClassResult:
    class_id: int
    ap: float | None
    n_gt: int
    tp: int
    fp: int
    fn: int
    precision: tuple[float, ...]
    recall: tuple[float, ...]


@dataclass(kw_only=True, frozen=True)
class TaskResult:
    """Results for one overlap criterion (boxes or masks)."""

    mode: MatchMode
    classes: dict[int, ClassResult]
    mean_ap: float | None
    matches: tuple[MatchRecord, ...] = field(repr=False)
    boundary_matches: int

    @property
    def tp(self) -> int:
        return sum(c.tp for c in self.classes.values())

    @property
    def fp(self) -> int:
        return sum(c.fp for c in self.classes.values())

    @property
    def fn(self) -> int:
        return sum(c.fn for c in self.classes.values())


@dataclass(kw_only=True, frozen=True)
class EvalReport:
    config: EvalConfig
    bbox: TaskResult | None
    mask: TaskResult | None

    @property
    def map_bbox(self) -> float | None:
        return None if self.bbox is None else self.bbox.mean_ap

    @property
    def map_mask(self) -> float | None:
        return None if self.mask is None else self.mask.mean_ap


def _evaluate_task(dets: list[Detection], gts: list[GroundTruth], config: EvalConfig, mode: MatchMode) -> TaskResult:
    matches = match_detections(dets, gts, config.iou_threshold, mode, strict=config.strict_iou)
    n_gt = Counter(g.class_id for g in gts)
    by_class: dict[int, list[MatchRecord]] = defaultdict(list)
    for m in matches:
        by_class[m.class_id].append(m)

    classes = {}
    for class_id in sorted(set(n_gt) | set(by_class)):
        records = sorted(by_class.get(class_id, []), key=lambda m: m.rank_key)
        precision, recall = precision_recall([m.is_tp for m in records], n_gt[class_id])
        tp = sum(m.is_tp for m in records)
        classes[class_id] = ClassResult(
            class_id=class_id,
            ap=average_precision(records, n_gt[class_id], config.interpolation),
            n_gt=n_gt[class_id],
            tp=tp,
            fp=len(records) - tp,
            fn=n_gt[class_id] - tp,
            precision=tuple(float(p) for p in precision),
            recall=tuple(float(r) for r in recall),
        )

    # mAP averages over classes present in the ground truth.
    aps = [classes[c].ap for c in sorted(n_gt)]
    mean_ap = sum(aps) / len(aps) if aps else None
    boundary = sum(1 for m in matches if m.is_tp and m.overlap == config.iou_threshold)
    if boundary:
        logger.warning("%d %s matches sit exactly on the IoU threshold %.3f", boundary, mode, config.iou_threshold)
    return TaskResult(
        mode=mode, classes=classes, mean_ap=mean_ap, matches=tuple(matches), boundary_matches=boundary
    )


def evaluate(dets: list[Detection], gts: list[GroundTruth], config: EvalConfig | None = None) -> EvalReport:
    """Box and (when masks are available) mask mAP at a single IoU threshold."""
    config = config or EvalConfig()
    have_masks = bool(gts) and all(g.mask is not None for g in gts) and all(d.mask is not None for d in dets)
    if config.mode == "mask" and not have_masks:
        raise ContractError("Mask evaluation needs masks on every detection and ground truth")

    bbox = _evaluate_task(dets, gts, config, "bbox") if config.mode in ("bbox", "both") else None
    mask = _evaluate_task(dets, gts, config, "mask") if config.mode != "bbox" and have_masks else None
    report = EvalReport(config=config, bbox=bbox, mask=mask)
    logger.info(
        "Evaluated %d detections against %d ground truths: mAP_bbox=%s mAP_mask=%s",
        len(dets),
        len(gts),
        _fmt(report.map_bbox),
        _fmt(report.map_mask),
    )
    return report


def _fmt(value: float | None) -> str:
    return "n/a" if value is None else f"{value:.3f}"


def report_to_dict(report: EvalReport) -> dict:
    """Machine-readable form with a fixed key order."""
    out: dict = {
        "iou_threshold": report.config.iou_threshold,
        "interpolation": report.config.interpolation,
        "strict_iou": report.config.strict_iou,
        "mAP_bbox": report.map_bbox,
        "mAP_mask": report.map_mask,
    }
    for name, task in (("bbox", report.bbox), ("mask", report.mask)):
        if task is None:
            continue
        out[name] = {
            "mAP": task.mean_ap,
            "tp": task.tp,
            "fp": task.fp,
            "fn": task.fn,
            "boundary_matches": task.boundary_matches,
            "classes": {
                str(c.class_id): {
                    "ap": c.ap,
                    "n_gt": c.n_gt,
                    "tp": c.tp,
                    "fp": c.fp,
                    "fn": c.fn,
                    "precision": list(c.precision),
                    "recall": list(c.recall),
                }
                for c in task.classes.values()
            },
        }
    return out


def format_report(report: EvalReport) -> str:
    lines = [
        f"IoU threshold: {report.config.iou_threshold} ({'strict' if report.config.strict_iou else 'inclusive'})",
        f"Interpolation: {report.config.interpolation}",
        f"mAP_bbox: {_fmt(report.map_bbox)}",
        f"mAP_mask: {_fmt(report.map_mask)}",
    ]
    for task in (report.bbox, report.mask):
        if task is None:
            continue
        lines.append("")
        lines.append(f"[{task.mode}] TP={task.tp} FP={task.fp} FN={task.fn} boundary={task.boundary_matches}")
        for c in task.classes.values():
            lines.append(f"  class {c.class_id}: AP={_fmt(c.ap)} n_gt={c.n_gt} TP={c.tp} FP={c.fp} FN={c.fn}")
    return "\n".join(lines) + "\n"


def write_report(report: EvalReport, out_dir: str | Path) -> tuple[Path, Path]:
    """Write ``report.txt`` and ``report.json`` into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    text_path = out / "report.txt"
    json_path = out / "report.json"
    text_path.write_text(format_report(report), encoding="utf-8")
    with open(json_path, "w", encoding="utf-8") as f:
        json.dump(report_to_dict(report), f, indent=2)
        f.write("\n")
    return text_path, json_path
