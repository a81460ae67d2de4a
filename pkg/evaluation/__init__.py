"""Detection matching, average precision and mAP reports."""

from .matching import Detection, GroundTruth, MatchMode, MatchRecord, detection_key, match_detections
from .precision import Interpolation, average_precision, precision_recall
from .report import (
    ClassResult,
    EvalConfig,
    EvalMode,
    EvalReport,
    TaskResult,
    evaluate,
    format_report,
    report_to_dict,
    write_report,
)

__all__ = [
    "ClassResult",
    "Detection",
    "EvalConfig",
    "EvalMode",
    "EvalReport",
    "GroundTruth",
    "Interpolation",
    "MatchMode",
    "MatchRecord",
    "TaskResult",
    "average_precision",
    "detection_key",
    "evaluate",
    "format_report",
    "match_detections",
    "precision_recall",
    "report_to_dict",
    "write_report",
]
