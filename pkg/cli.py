"""CLI entry points.

These commands are exposed in pyproject.toml as the ``castdefect`` script:
- evaluate: box and mask mAP of a detection file against ground truth
- ingest-gdxray: normalize GDXray per-series box files
- masks-to-boxes: tile weld masks and wrap each region in a tight box
- synth: write a synthetic casting dataset
- augment: apply training-time augmentations to a dataset directory
- selfcheck: run the oracle suites

Exit codes: 0 success, 1 check failure, 2 input error.
"""

import logging
import os
from collections.abc import Iterator
from contextlib import contextmanager
from dataclasses import replace
from pathlib import Path

import click
import numpy as np
from pydantic import ValidationError

from errors import CastDefectError
from evaluation import EvalConfig, evaluate, write_report
from imaging import AugmentSpec, SynthSpec, augment, resize_and_pad, synth_dataset, train_test_split
from records import (
    ingest_gdxray,
    load_dataset,
    masks_to_records,
    read_detections,
    read_ground_truth,
    to_detections,
    to_ground_truths,
    write_dataset,
    write_ground_truth,
)
from selfcheck import SelfCheckOptions, resolve_suites, run_selfcheck

logger = logging.getLogger(__name__)

LOG_LEVEL_ENV = "CASTDEFECT_LOG_LEVEL"

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_INPUT_ERROR = 2

INTERPOLATIONS = {"all": "all_points", "11pt": "eleven_point"}


def configure_logging() -> None:
    level_name = os.environ.get(LOG_LEVEL_ENV, "INFO").upper()
    level = logging.getLevelName(level_name)
    if not isinstance(level, int):
        level = logging.INFO
    logging.basicConfig(level=level, format="[%(levelname)s] %(message)s")
    if level_name != logging.getLevelName(level):
        logger.warning("Unknown %s=%r, using INFO", LOG_LEVEL_ENV, level_name)


@contextmanager
def input_errors() -> Iterator[None]:
    """Report bad input files or flags and exit with code 2."""
    try:
        yield
    except CastDefectError as exc:
        click.echo(f"Error: {exc.message}", err=True)
        raise SystemExit(EXIT_INPUT_ERROR) from exc
    except ValidationError as exc:
        click.echo(f"Error: invalid configuration: {exc}", err=True)
        raise SystemExit(EXIT_INPUT_ERROR) from exc
    except OSError as exc:
        click.echo(f"Error: {exc}", err=True)
        raise SystemExit(EXIT_INPUT_ERROR) from exc


def _fmt(value: float | None) -> str:
    return "n/a" if value is None else f"{value:.3f}"


@click.group()
def main() -> None:
    """Casting-defect detection core: geometry, evaluation and data tools."""
    configure_logging()


# ====================================================================
# evaluate
# ====================================================================


@main.command("evaluate")
@click.option("--gt", "gt_path", required=True, type=click.Path(dir_okay=False), help="Ground-truth CSV.")
@click.option("--det", "det_path", required=True, type=click.Path(dir_okay=False), help="Detection JSON-lines.")
@click.option("--iou-thresh", default=0.5, show_default=True, type=float, help="Match threshold.")
@click.option("--interp", type=click.Choice(list(INTERPOLATIONS)), default="all", show_default=True)
@click.option("--mode", type=click.Choice(["bbox", "mask", "both"]), default="both", show_default=True)
@click.option("--strict-iou", is_flag=True, help="Require IoU strictly above the threshold.")
@click.option("--out", "out_dir", default="eval_report", show_default=True, type=click.Path(file_okay=False))
def evaluate_cmd(
    gt_path: str, det_path: str, iou_thresh: float, interp: str, mode: str, strict_iou: bool, out_dir: str
) -> None:
    """Compute mAP_bbox (and mAP_mask when masks are given) and write report.txt / report.json."""
    with input_errors():
        config = EvalConfig(
            iou_threshold=iou_thresh, interpolation=INTERPOLATIONS[interp], mode=mode, strict_iou=strict_iou
        )
        gt_records = read_ground_truth(gt_path)
        det_records = read_detections(det_path)
        known = {r.image_id for r in gt_records}
        unknown = sorted({r.image_id for r in det_records} - known)
        if unknown:
            logger.warning(
                "%d detection image id(s) have no ground truth, their detections count as false positives: %s",
                len(unknown),
                ", ".join(unknown[:10]) + (" ..." if len(unknown) > 10 else ""),
            )
        gts = to_ground_truths(gt_records, Path(gt_path).parent)
        dets = to_detections(det_records, Path(det_path).parent)
        report = evaluate(dets, gts, config)
        text_path, json_path = write_report(report, out_dir)

    click.echo(f"mAP_bbox: {_fmt(report.map_bbox)}")
    click.echo(f"mAP_mask: {_fmt(report.map_mask)}")
    click.echo(f"Wrote {text_path} and {json_path}")


# ====================================================================
# Dataset commands
# ====================================================================


@main.command("ingest-gdxray")
@click.argument("src_dir", type=click.Path(exists=True, file_okay=False))
@click.option(
    "--ordering",
    type=click.Choice(["gdxray", "xyxy"]),
    default="gdxray",
    show_default=True,
    help="Column order after the image index: gdxray is x1 x2 y1 y2, xyxy is x1 y1 x2 y2.",
)
@click.option("--out", "out_path", default="ground_truth.csv", show_default=True, type=click.Path(dir_okay=False))
def ingest_gdxray_cmd(src_dir: str, ordering: str, out_path: str) -> None:
    """Convert GDXray ground_truth.txt files under SRC_DIR into the ground-truth CSV."""
    with input_errors():
        records = ingest_gdxray(src_dir, ordering)
        write_ground_truth(out_path, records)
    click.echo(f"Wrote {len(records)} boxes to {out_path}")


@main.command("masks-to-boxes")
@click.argument("mask_dir", type=click.Path(exists=True, file_okay=False))
@click.option("--tiles", default=8, show_default=True, type=click.IntRange(min=1), help="Horizontal tiles per mask.")
@click.option("--image-dir", type=click.Path(exists=True, file_okay=False), help="Tile the matching images too.")
@click.option("--class-id", default=1, show_default=True, type=click.IntRange(min=0))
@click.option("--out", "out_dir", default="welds_dataset", show_default=True, type=click.Path(file_okay=False))
def masks_to_boxes_cmd(mask_dir: str, tiles: int, image_dir: str | None, class_id: int, out_dir: str) -> None:
    """Trace every region of every mask PNG in MASK_DIR into a box plus RLE mask."""
    with input_errors():
        records = masks_to_records(mask_dir, out_dir, tiles, image_dir=image_dir, class_id=class_id)
    click.echo(f"Wrote {len(records)} boxes to {Path(out_dir) / 'ground_truth.csv'}")


@main.command("synth")
@click.option("--n", "n_images", default=25, show_default=True, type=click.IntRange(min=1))
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--width", default=256, show_default=True, type=int)
@click.option("--height", default=256, show_default=True, type=int)
@click.option(
    "--test-fraction",
    default=0.0,
    show_default=True,
    type=click.FloatRange(0.0, 1.0),
    help="Also write train.txt / test.txt image id lists.",
)
@click.option("--out", "out_dir", default="synth_dataset", show_default=True, type=click.Path(file_okay=False))
def synth_cmd(n_images: int, seed: int, width: int, height: int, test_fraction: float, out_dir: str) -> None:
    """Write a synthetic X-ray casting dataset with box and mask ground truth."""
    with input_errors():
        spec = SynthSpec(width=width, height=height)
        items = synth_dataset(n_images, spec, seed)
        records = write_dataset(items, out_dir)
        if test_fraction > 0:
            train, test = train_test_split([item.image_id for item in items], test_fraction, seed)
            out = Path(out_dir)
            (out / "train.txt").write_text("".join(f"{i}\n" for i in train), encoding="utf-8")
            (out / "test.txt").write_text("".join(f"{i}\n" for i in test), encoding="utf-8")
    click.echo(f"Wrote {n_images} images with {len(records)} defects to {out_dir}")


@main.command("augment")
@click.argument("data_dir", type=click.Path(exists=True, file_okay=False))
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--copies", default=1, show_default=True, type=click.IntRange(min=1), help="Augmented copies per image.")
@click.option("--flip/--no-flip", default=True, show_default=True, help="Random horizontal and vertical flips.")
@click.option("--blur", is_flag=True, help="Gaussian blur.")
@click.option("--blur-sigma", default=1.0, show_default=True, type=float)
@click.option("--noise", is_flag=True, help="Gaussian noise.")
@click.option("--noise-fraction", default=0.05, show_default=True, type=float)
@click.option("--crop", "crop_fraction", type=float, help="Random crop keeping this fraction of each side.")
@click.option("--resize/--no-resize", default=False, show_default=True, help="Scale and pad to 768x768 first.")
def augment_cmd(
    data_dir: str,
    out_dir: str,
    seed: int,
    copies: int,
    flip: bool,
    blur: bool,
    blur_sigma: float,
    noise: bool,
    noise_fraction: float,
    crop_fraction: float | None,
    resize: bool,
) -> None:
    """Write augmented copies of the dataset in DATA_DIR."""
    with input_errors():
        spec = AugmentSpec(
            horizontal_flip=flip,
            vertical_flip=flip,
            gaussian_blur=blur,
            blur_sigma=blur_sigma,
            gaussian_noise=noise,
            noise_fraction=noise_fraction,
            random_crop=crop_fraction is not None,
            crop_fraction=crop_fraction if crop_fraction is not None else 1.0,
            seed=seed,
        )
        items = load_dataset(data_dir)
        out_items = []
        index = 0
        for item in items:
            if resize:
                item, _ = resize_and_pad(item)
            for k in range(copies):
                result = augment(item, spec, training=True, index=index)
                index += 1
                if copies > 1:
                    result = replace(result, image_id=f"{item.image_id}_aug{k}")
                out_items.append(result)
        bit_depth = 16 if any(np.max(item.image) > 255 for item in out_items) else 8
        records = write_dataset(out_items, out_dir, bit_depth=bit_depth)
    click.echo(f"Wrote {len(out_items)} images with {len(records)} annotations to {out_dir}")


# ====================================================================
# selfcheck
# ====================================================================


@main.command("selfcheck")
@click.option("--suite", "suites", multiple=True, help="Run only these suites (repeatable).")
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--quick", is_flag=True, help="Run a tenth of the cases per suite.")
@click.option("--perturb-smooth-l1", "smooth_l1_slope", default=1.0, type=float, hidden=True)
def selfcheck_cmd(suites: tuple[str, ...], seed: int, quick: bool, smooth_l1_slope: float) -> None:
    """Check losses, geometry, RoIAlign, masks, augmentation and evaluation against oracles."""
    try:
        names = resolve_suites(suites)
    except KeyError as exc:
        click.echo(f"Error: {exc.args[0]}", err=True)
        raise SystemExit(EXIT_INPUT_ERROR) from exc

    options = SelfCheckOptions(seed=seed, size_factor=0.1 if quick else 1.0, smooth_l1_slope=smooth_l1_slope)
    report = run_selfcheck(names, options)
    for result in report.results:
        click.echo(result.describe())

    if report.passed:
        click.echo(f"All {len(report.results)} suites passed")
    else:
        click.echo(f"Failed suites: {', '.join(report.failed)}")
    raise SystemExit(EXIT_OK if report.passed else EXIT_CHECK_FAILED)


if __name__ == "__main__":
    main()
