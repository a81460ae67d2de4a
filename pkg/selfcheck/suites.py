"""Oracle suites.

Each suite draws random instances from its own generator, compares the library against a
reference (``oracles.py`` or a closed form) and reports the largest deviation it saw.
Suites register themselves with ``@suite(name, tolerance)``; a suite passes when its
deviation is within tolerance and it raised nothing.
"""

import logging
import math
import re
import time
import zlib
from collections.abc import Callable
from dataclasses import dataclass, field, replace
from functools import lru_cache, partial
from typing import Any

import numpy as np

from errors import CheckFailure
from evaluation import Detection, EvalConfig, GroundTruth, evaluate, report_to_dict
from geometry import AnchorConfig, Box, decode_box, encode_box, generate_anchors, iou, nms_indices
from imaging import (
    AnnotatedImage,
    Annotation,
    flip,
    gaussian_blur,
    gaussian_kernel,
    gaussian_noise,
    noise_sigma,
    random_crop,
    resize_and_pad,
    synth_dataset,
)
from masks import split_tiles, trace_regions
from roialign import AlignConfig, FeatureMap, roi_align
from targets import LossWeights, classification_loss, location_loss, mask_loss, smooth_l1, total_loss

from . import oracles
from .spec import SelfCheckOptions, SuiteResult

logger = logging.getLogger(__name__)

FD_STEP = 1e-5


@dataclass(kw_only=True, frozen=True)
class Outcome:
    max_deviation: float
    cases: int
    metadata: dict[str, Any] = field(default_factory=dict)


SuiteFn = Callable[[np.random.Generator, SelfCheckOptions], Outcome]


@dataclass(kw_only=True, frozen=True)
class Suite:
    name: str
    tolerance: float
    fn: SuiteFn

    @property
    def description(self) -> str:
        doc = (self.fn.__doc__ or "").strip()
        return doc.splitlines()[0] if doc else ""

    def run(self, options: SelfCheckOptions | None = None) -> SuiteResult:
        options = options or SelfCheckOptions()
        rng = np.random.default_rng([options.seed, zlib.crc32(self.name.encode())])
        started = time.perf_counter()
        try:
            outcome = self.fn(rng, options)
        except CheckFailure as exc:
            logger.error("Suite %s failed: %s", self.name, exc.message)
            return SuiteResult(
                name=self.name,
                passed=False,
                max_deviation=math.inf,
                tolerance=self.tolerance,
                cases=0,
                seconds=time.perf_counter() - started,
                error=exc.message,
            )
        deviation = float(outcome.max_deviation)
        return SuiteResult(
            name=self.name,
            passed=bool(deviation <= self.tolerance),
            max_deviation=deviation,
            tolerance=self.tolerance,
            cases=outcome.cases,
            seconds=time.perf_counter() - started,
            metadata=outcome.metadata,
        )


SUITES: dict[str, Suite] = {}
SUITE_NAME = re.compile(r"[a-z][a-z0-9_]*")


def suite(name: str, tolerance: float) -> Callable[[SuiteFn], SuiteFn]:
    """Register a suite function under ``name``, a lowercase identifier usable as ``--suite name``."""
    if not SUITE_NAME.fullmatch(name):
        raise ValueError(f"Suite name must be lowercase letters, digits and underscores, got {name!r}")

    def register(fn: SuiteFn) -> SuiteFn:
        if name in SUITES:
            raise ValueError(f"Suite {name!r} is already registered")
        SUITES[name] = Suite(name=name, tolerance=tolerance, fn=fn)
        return fn

    return register


def _relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    analytic = np.asarray(analytic, dtype=np.float64)
    numeric = np.asarray(numeric, dtype=np.float64)
    scale = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), 1.0)
    return float(np.max(np.abs(analytic - numeric) / scale))


def _central_difference(f: Callable[[np.ndarray], float], x: np.ndarray, indices=None) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    grad = np.zeros_like(x)
    flat = grad.reshape(-1)
    for k in range(x.size) if indices is None else indices:
        step = np.zeros(x.size)
        step[k] = FD_STEP
        step = step.reshape(x.shape)
        flat[k] = (f(x + step) - f(x - step)) / (2.0 * FD_STEP)
    return grad


# ====================================================================
# geometry
# ====================================================================


def _random_int_box(rng: np.random.Generator, size: int = 64) -> Box:
    x1, y1 = (int(v) for v in rng.integers(0, size, size=2))
    x2 = int(rng.integers(x1 + 1, size + 1))
    y2 = int(rng.integers(y1 + 1, size + 1))
    return Box(float(x1), float(y1), float(x2), float(y2))


@suite("iou_raster", tolerance=0.0)
def iou_raster(rng: np.random.Generator, options: SelfCheckOptions) -> Outcome:
    """IoU of integer boxes equals the pixel-count IoU, and is symmetric."""
    n = options.cases(10_000)
    worst = 0.0
    for _ in range(n):
        a, b = _random_int_box(rng), _random_int_box(rng)
        value = iou(a, b)
        worst = max(worst, abs(value - oracles.raster_iou(a, b)), abs(value - iou(b, a)))
    return Outcome(max_deviation=worst, cases=n)


@suite("encode_decode", tolerance=1e-9)
def encode_decode(rng: np.random.Generator, options: SelfCheckOptions) -> Outcome:
    """decode(encode(b, a)) reproduces b for both encoding variants."""
    n = options.cases(1_000)
    worst = 0.0
    for _ in range(n):
        box = Box.from_center(*rng.uniform(0, 768, size=2), *rng.uniform(2, 512, size=2))
        anchor = Box.from_center(*rng.uniform(0, 768, size=2), *rng.uniform(8, 512, size=2))
        for variant in ("anchor_relative", "absolute"):
            decoded = decode_box(encode_box(box, anchor, variant), anchor)
            for got, want in zip(decoded.as_tuple(), box.as_tuple(), strict=True):
                worst = max(worst, abs(got - want) / max(abs(want), 1.0))
    return Outcome(max_deviation=worst, cases=2 * n)


@suite("anchor_count", tolerance=0.0)
def anchor_count(rng: np.random.Generator, options: SelfCheckOptions) -> Outcome:
    """|anchors| = |scales| * |ratios| * W * H; the default grid has 15 per location, smallest 16x16."""
    n = options.cases(10)
    mismatches = 0
    for _ in range(n):
        cfg = AnchorConfig(
            base_size=float(rng.uniform(4, 32)),
            scales=tuple(float(s) for s in rng.uniform(0.5, 16, size=int(rng.integers(1, 6)))),
            aspect_ratios=tuple(float(r) for r in rng.uniform(0.25, 4, size=int(rng.integers(1, 5)))),
            feature_stride=float(rng.choice([4, 8, 16, 32])),
        )
        feat_w, feat_h = (int(v) for v in rng.integers(1, 49, size=2))
        expected = len(cfg.scales) * len(cfg.aspect_ratios) * feat_w * feat_h
        mismatches += abs(len(generate_anchors(cfg, feat_w, feat_h)) - expected)

    defaults = AnchorConfig()
    single = generate_anchors(defaults, 1, 1)
    smallest = min(single, key=lambda anchor: max(anchor.box.width, anchor.box.height))
    mismatches += abs(defaults.anchors_per_location - 15) + abs(len(single) - 15)
    mismatches += abs(smallest.box.width - 16.0) + abs(smallest.box.height - 16.0)
    mismatches += abs(len(generate_anchors(defaults, 48, 48)) - 34_560)
    return Outcome(max_deviation=float(mismatches), cases=n + 3)


@suite("nms", tolerance=0.0)
def nms_suite(rng: np.random.Generator, options: SelfCheckOptions) -> Outcome:
    """Vectorized NMS keeps exactly the boxes the all-pairs greedy reference keeps."""
    n = options.cases(200)
    mismatched = 0
    for _ in range(n):
        count = int(rng.integers(1, 501))
        centers = rng.uniform(0, 256, size=(count, 2))
        sizes = rng.uniform(10, 80, size=(count, 2))
        boxes = [Box.from_center(cx, cy, w, h) for (cx, cy), (w, h) in zip(centers, sizes, strict=True)]
        # Rounded scores force ties, which must break toward the lower index.
        scores = np.round(rng.uniform(0, 1, size=count), 2)
        threshold = float(rng.uniform(0.3, 0.7))
        arr = np.array([b.as_tuple() for b in boxes])
        got = nms_indices(arr, scores, threshold).tolist()
        if got != oracles.brute_nms(boxes, scores.tolist(), threshold):
            mismatched += 1
    return Outcome(max_deviation=float(mismatched), cases=n)


# ====================================================================
# targets
# ====================================================================


def _combined_loss(v: np.ndarray, *, target, p_star, weights, sl1) -> float:
    loc = location_loss(v[:4], target, 1, smooth_l1_fn=sl1)
    return total_loss(loc, classification_loss(float(v[4]), p_star), weights).value


def _summed_mask_loss(v: np.ndarray, *, gt, k) -> float:
    return mask_loss(v, gt, k).value * gt.size


def _scaled_smooth_l1(slope: float):
    def fn(x: float) -> tuple[float, float]:
        value, derivative = smooth_l1(x)
        return value, slope * derivative

    return fn


@suite("gradients", tolerance=1e-4)
def gradients(rng: np.random.Generator, options: SelfCheckOptions) -> Outcome:
    """Analytic loss gradients agree with central finite differences."""
    n = options.cases(100)
    sl1 = _scaled_smooth_l1(options.smooth_l1_slope)
    worst: dict[str, float] = {"smooth_l1": 0.0, "location": 0.0, "classification": 0.0, "total": 0.0, "mask": 0.0}

    for _ in range(n):
        x = float(rng.uniform(-3, 3))
        numeric = (sl1(x + FD_STEP)[0] - sl1(x - FD_STEP)[0]) / (2 * FD_STEP)
        worst["smooth_l1"] = max(worst["smooth_l1"], _relative_error(sl1(x)[1], numeric))

        pred, target = rng.normal(0, 1.5, size=4), rng.normal(0, 1.5, size=4)
        analytic = location_loss(pred, target, 1, smooth_l1_fn=sl1).gradient
        numeric = _central_difference(lambda v, t=target: location_loss(v, t, 1, smooth_l1_fn=sl1).value, pred)
        worst["location"] = max(worst["location"], _relative_error(analytic, numeric))

        p, p_star = float(rng.uniform(0.05, 0.95)), int(rng.integers(0, 2))
        analytic = classification_loss(p, p_star).gradient
        numeric = _central_difference(lambda v, y=p_star: classification_loss(float(v[0]), y).value, np.array([p]))
        worst["classification"] = max(worst["classification"], _relative_error(analytic, numeric))

        weights = LossWeights(alpha=float(rng.uniform(0.1, 2)), beta=float(rng.uniform(0.1, 2)))

        combined = partial(_combined_loss, target=target, p_star=p_star, weights=weights, sl1=sl1)
        point = np.concatenate([pred, [p]])
        analytic = total_loss(
            location_loss(pred, target, 1, smooth_l1_fn=sl1), classification_loss(p, p_star), weights
        ).gradient
        worst["total"] = max(worst["total"], _relative_error(analytic, _central_difference(combined, point)))

        logits = rng.normal(0, 2, size=(28, 28, 2))
        gt = rng.random((28, 28)) < 0.4
        k = int(rng.integers(0, 2))
        # Compared per pixel, i.e. on the summed loss, so 1/784-sized entries are not lost below the error floor.
        picks = rng.choice(logits.size, size=16, replace=False)
        analytic = mask_loss(logits, gt, k).gradient.reshape(-1)[picks] * gt.size
        summed = partial(_summed_mask_loss, gt=gt, k=k)
        numeric = _central_difference(summed, logits, picks).reshape(-1)[picks]
        worst["mask"] = max(worst["mask"], _relative_error(analytic, numeric))

    return Outcome(max_deviation=max(worst.values()), cases=5 * n, metadata={"per_loss": worst})


@suite("loss_gating", tolerance=0.0)
def loss_gating(rng: np.random.Generator, options: SelfCheckOptions) -> Outcome:
    """Location loss vanishes for negatives; mask gradients vanish off the ground-truth class slice."""
    n = options.cases(100)
    worst = 0.0
    for _ in range(n):
        loss = location_loss(rng.normal(0, 3, size=4), rng.normal(0, 3, size=4), 0)
        worst = max(worst, abs(loss.value), float(np.max(np.abs(loss.gradient))))

        logits = rng.normal(0, 2, size=(28, 28, 3))
        k = int(rng.integers(0, 3))
        gradient = mask_loss(logits, rng.random((28, 28)) < 0.5, k).gradient
        others = np.delete(gradient, k, axis=2)
        worst = max(worst, float(np.max(np.abs(others))))
    return Outcome(max_deviation=worst, cases=n)


# ====================================================================
# roialign
# ====================================================================


def _inner_roi(rng: np.random.Generator, fm: FeatureMap, max_cells: float) -> Box:
    """RoI whose feature-coordinate extent stays within the outermost cell centers."""
    w_cells = float(rng.uniform(0.5, min(max_cells, fm.width - 1.0)))
    h_cells = float(rng.uniform(0.5, min(max_cells, fm.height - 1.0)))
    x1 = float(rng.uniform(0, fm.width - 1.0 - w_cells))
    y1 = float(rng.uniform(0, fm.height - 1.0 - h_cells))
    s = fm.stride
    return Box(x1 * s, y1 * s, (x1 + w_cells) * s, (y1 + h_cells) * s)


@suite("roi_align_affine", tolerance=1e-9)
def roi_align_affine(rng: np.random.Generator, options: SelfCheckOptions) -> Outcome:
    """On an affine feature map every output cell equals the map's value at its bin center."""
    n = options.cases(100)
    worst = 0.0
    for _ in range(n):
        h, w, c = int(rng.integers(4, 25)), int(rng.integers(4, 25)), int(rng.integers(1, 4))
        coef = rng.normal(0, 1, size=(3, c))
        ys, xs = np.mgrid[0:h, 0:w].astype(np.float64)
        fm = FeatureMap(data=coef[0] + xs[..., None] * coef[1] + ys[..., None] * coef[2], stride=16.0)
        roi = _inner_roi(rng, fm, max_cells=24.0)
        cfg = AlignConfig(out_h=int(rng.integers(1, 15)), out_w=int(rng.integers(1, 15)))
        out = roi_align(fm, roi, cfg)

        bw = roi.width / fm.stride / cfg.out_w
        bh = roi.height / fm.stride / cfg.out_h
        xc = roi.x1 / fm.stride + (np.arange(cfg.out_w) + 0.5) * bw
        yc = roi.y1 / fm.stride + (np.arange(cfg.out_h) + 0.5) * bh
        expected = coef[0] + xc[None, :, None] * coef[1] + yc[:, None, None] * coef[2]
        worst = max(worst, float(np.max(np.abs(out - expected))))
    return Outcome(max_deviation=worst, cases=n)


@suite("roi_align_loops", tolerance=1e-9)
def roi_align_loops(rng: np.random.Generator, options: SelfCheckOptions) -> Outcome:
    """Vectorized RoIAlign equals a per-sample loop, including RoIs hanging off the map."""
    n = options.cases(100)
    worst = 0.0
    for _ in range(n):
        h, w, c = int(rng.integers(2, 20)), int(rng.integers(2, 20)), int(rng.integers(1, 3))
        fm = FeatureMap(data=rng.normal(0, 1, size=(h, w, c)), stride=8.0)
        x1, y1 = rng.uniform(-2, w, size=2) * fm.stride
        roi_w, roi_h = rng.uniform(1, 12 * fm.stride, size=2)
        roi = Box(float(x1), float(y1), float(x1 + roi_w), float(y1 + roi_h))
        cfg = AlignConfig(
            out_h=int(rng.integers(1, 8)), out_w=int(rng.integers(1, 8)), sampling_ratio=int(rng.integers(1, 4))
        )
        out = roi_align(fm, roi, cfg)
        if out.shape != (cfg.out_h, cfg.out_w, c):
            raise CheckFailure(f"roi_align returned shape {out.shape}, expected {(cfg.out_h, cfg.out_w, c)}")
        expected = oracles.roi_align_reference(fm.data, fm.stride, roi, cfg.out_h, cfg.out_w, cfg.sampling_ratio)
        worst = max(worst, float(np.max(np.abs(out - expected))))
    return Outcome(max_deviation=worst, cases=n)


@suite("roi_align_dense", tolerance=1e-2)
def roi_align_dense(rng: np.random.Generator, options: SelfCheckOptions) -> Outcome:
    """Four samples per bin approximate the dense bin average of a smooth map."""
    n = options.cases(100)
    worst = 0.0
    for _ in range(n):
        h, w = int(rng.integers(12, 33)), int(rng.integers(12, 33))
        fx, fy = rng.uniform(0.02, 0.2, size=2)
        px, py = rng.uniform(0, 2 * np.pi, size=2)
        ys, xs = np.mgrid[0:h, 0:w].astype(np.float64)
        data = np.stack([np.sin(fx * xs + px) * np.cos(fy * ys + py), np.cos(fx * xs - fy * ys + px)], axis=2)
        fm = FeatureMap(data=data, stride=16.0)
        roi = _inner_roi(rng, fm, max_cells=10.0)
        out = roi_align(fm, roi, AlignConfig())
        expected = oracles.bin_average(fm.data, fm.stride, roi, 7, 7)
        worst = max(worst, float(np.max(np.abs(out - expected))))
    return Outcome(max_deviation=worst, cases=n)


# ====================================================================
# masks
# ====================================================================


def _random_mask(rng: np.random.Generator) -> np.ndarray:
    h, w = int(rng.integers(1, 65)), int(rng.integers(1, 65))
    density = float(rng.uniform(0.05, 0.7))
    mask = rng.random((h, w)) < density
    if rng.random() < 0.5:
        # Blockier shapes with holes and nesting.
        coarse = rng.random(((h + 3) // 4, (w + 3) // 4)) < density
        mask = np.kron(coarse, np.ones((4, 4), dtype=bool))[:h, :w] ^ (rng.random((h, w)) < 0.05)
    return mask


def _regions_disagree(mask: np.ndarray) -> bool:
    regions = trace_regions(mask)
    components = oracles.flood_fill_components(mask)
    if len(regions) != len(components):
        return True
    h, w = mask.shape
    for region, component in zip(regions, components, strict=True):
        if not np.array_equal(region.to_mask(w, h), component):
            return True
        if region.box.as_tuple() != oracles.tight_box(component):
            return True
        if region.pixel_count != int(component.sum()):
            return True
    return False


@suite("border_following", tolerance=0.0)
def border_following(rng: np.random.Generator, options: SelfCheckOptions) -> Outcome:
    """Traced regions match a BFS flood fill in count, membership and tight boxes."""
    n = options.cases(500)
    mismatched = sum(_regions_disagree(_random_mask(rng)) for _ in range(n))
    return Outcome(max_deviation=float(mismatched), cases=n)


@suite("welds_tiling", tolerance=0.0)
def welds_tiling(rng: np.random.Generator, options: SelfCheckOptions) -> Outcome:
    """A 4000 px wide mask splits into eight 500 px tiles whose boxes tightly bound their regions."""
    mask = np.zeros((96, 4000), dtype=bool)
    ys, xs = np.ogrid[0:96, 0:4000]
    for _ in range(60):
        cx, cy = rng.uniform(0, 4000), rng.uniform(0, 96)
        rx, ry = rng.uniform(3, 40), rng.uniform(2, 12)
        mask |= ((xs - cx) / rx) ** 2 + ((ys - cy) / ry) ** 2 <= 1.0
    # Guarantee one blob straddles a tile edge.
    mask[40:50, 495:505] = True

    problems = 0
    tiles = split_tiles(mask, 8)
    problems += sum(tile.shape != (96, 500) for tile in tiles)
    for tile in tiles:
        union = np.zeros_like(tile)
        for region in trace_regions(tile):
            member = region.to_mask(tile.shape[1], tile.shape[0])
            problems += region.box.as_tuple() != oracles.tight_box(member)
            union |= member
        problems += not np.array_equal(union, tile)
    return Outcome(max_deviation=float(problems), cases=len(tiles))


# ====================================================================
# imaging
# ====================================================================


@lru_cache(maxsize=4)
def _dataset(n: int, seed: int) -> tuple[AnnotatedImage, ...]:
    return tuple(synth_dataset(n, seed=seed))


@suite("flip_involution", tolerance=0.0)
def flip_involution(rng: np.random.Generator, options: SelfCheckOptions) -> Outcome:
    """Flipping twice along either axis restores image, boxes and masks bit for bit."""
    items = _dataset(options.cases(10), options.seed)
    mismatched = 0
    for item in items:
        for axis in ("horizontal", "vertical"):
            back = flip(flip(item, axis), axis)
            same = np.array_equal(back.image, item.image) and back.boxes == item.boxes
            same = same and all(
                np.array_equal(a.mask, b.mask) for a, b in zip(back.annotations, item.annotations, strict=True)
            )
            mismatched += not same
    return Outcome(max_deviation=float(mismatched), cases=2 * len(items))


@suite("crop_boxes", tolerance=0.0)
def crop_boxes(rng: np.random.Generator, options: SelfCheckOptions) -> Outcome:
    """After a crop every box equals the extent of the regions traced from its cropped mask."""
    items = _dataset(options.cases(10), options.seed)
    mismatched = cases = 0
    for item in items:
        for _ in range(5):
            cropped = random_crop(item, float(rng.uniform(0.3, 0.9)), seed=int(rng.integers(2**32)))
            for ann in cropped.annotations:
                boxes = np.array([region.box.as_tuple() for region in trace_regions(ann.mask)])
                traced = (*boxes[:, :2].min(axis=0), *boxes[:, 2:].max(axis=0)) if len(boxes) else None
                mismatched += traced is None or ann.box.as_tuple() != tuple(float(v) for v in traced)
                cases += 1
    return Outcome(max_deviation=float(mismatched), cases=cases)


@suite("blur", tolerance=1e-9)
def blur(rng: np.random.Generator, options: SelfCheckOptions) -> Outcome:
    """Blur keeps flat images exactly and its impulse response is the outer product of the kernel."""
    worst = 0.0
    for _ in range(options.cases(20)):
        value = float(rng.uniform(0, 65535))
        flat = np.full((int(rng.integers(1, 40)), int(rng.integers(1, 40))), value)
        if not np.array_equal(gaussian_blur(flat, float(rng.uniform(0.3, 3))), flat):
            raise CheckFailure(f"blur changed a constant image of value {value}")

    for sigma in (0.5, 1.0, 2.0):
        kernel = gaussian_kernel(sigma)
        r = len(kernel) // 2
        size = 4 * r + 1
        impulse = np.zeros((size, size))
        impulse[size // 2, size // 2] = 1.0
        expected = np.zeros_like(impulse)
        expected[size // 2 - r : size // 2 + r + 1, size // 2 - r : size // 2 + r + 1] = np.outer(kernel, kernel)
        worst = max(worst, float(np.max(np.abs(gaussian_blur(impulse, sigma) - expected))))
    return Outcome(max_deviation=worst, cases=options.cases(20) + 3)


@suite("noise", tolerance=1e-2)
def noise(rng: np.random.Generator, options: SelfCheckOptions) -> Outcome:
    """Additive noise has standard deviation 0.05 of the dynamic range (1 megapixel sample)."""
    img = np.full((1000, 1000), 127.5)
    img[0, 0], img[0, 1] = 0.0, 255.0
    sigma = noise_sigma(img)
    diff = (gaussian_noise(img, seed=int(rng.integers(2**32))) - img).ravel()[2:]
    measured = float(diff.std())
    return Outcome(max_deviation=abs(measured / sigma - 1.0), cases=1, metadata={"sigma": sigma, "measured": measured})


@suite("resize_pad", tolerance=0.0)
def resize_pad(rng: np.random.Generator, options: SelfCheckOptions) -> Outcome:
    """A 1024x512 image becomes a 768x768 canvas with 768x384 content."""
    item = AnnotatedImage(
        image_id="wide",
        image=rng.uniform(0, 255, size=(512, 1024)),
        annotations=(Annotation(box=Box(100.0, 50.0, 300.0, 250.0)),),
    )
    out, record = resize_and_pad(item)
    problems = (out.width != 768) + (out.height != 768) + (record.content_w != 768) + (record.content_h != 384)
    problems += out.boxes[0].as_tuple() != (75.0, 37.5, 225.0, 187.5)
    restored = np.array(record.to_original(out.boxes[0]).as_tuple())
    problems += not np.allclose(restored, item.boxes[0].as_tuple(), rtol=0.0, atol=1e-9)
    return Outcome(max_deviation=float(problems), cases=1)


# ====================================================================
# evaluation
# ====================================================================


def _ground_truths(items) -> list[GroundTruth]:
    return [
        GroundTruth(image_id=item.image_id, class_id=ann.class_id, box=ann.box, mask=ann.mask)
        for item in items
        for ann in item.annotations
    ]


@suite("evaluator_echo", tolerance=0.0)
def evaluator_echo(rng: np.random.Generator, options: SelfCheckOptions) -> Outcome:
    """Echoing the ground truth as detections scores mAP 1 for boxes and masks."""
    items = _dataset(options.cases(50), options.seed)
    gts = _ground_truths(items)
    dets = [Detection(image_id=g.image_id, class_id=g.class_id, score=1.0, box=g.box, mask=g.mask) for g in gts]
    report = evaluate(dets, gts, EvalConfig())
    deviation = max(abs(1.0 - (report.map_bbox or 0.0)), abs(1.0 - (report.map_mask or 0.0)))
    return Outcome(max_deviation=deviation, cases=len(gts))


@suite("evaluator_prefix", tolerance=1e-9)
def evaluator_prefix(rng: np.random.Generator, options: SelfCheckOptions) -> Outcome:
    """AP of a constructed ranking equals the area enumerated prefix by prefix."""
    n = options.cases(100)
    worst = 0.0
    for _ in range(n):
        n_gt = int(rng.integers(1, 9))
        n_det = int(rng.integers(1, 21))
        n_tp = int(rng.integers(0, min(n_gt, n_det) + 1))
        flags = np.zeros(n_det, dtype=bool)
        flags[rng.choice(n_det, size=n_tp, replace=False)] = True
        scores = np.sort(rng.uniform(0.01, 1.0, size=n_det))[::-1]

        gt_boxes = [Box(40.0 * k, 0.0, 40.0 * k + 20.0, 20.0) for k in range(n_gt)]
        gts = [GroundTruth(image_id="img", class_id=1, box=b) for b in gt_boxes]
        dets, next_gt = [], 0
        for rank, is_tp in enumerate(flags):
            if is_tp:
                box = gt_boxes[next_gt]
                next_gt += 1
            else:
                box = Box(40.0 * rank, 500.0, 40.0 * rank + 20.0, 520.0)
            dets.append(Detection(image_id="img", class_id=1, score=float(scores[rank]), box=box))
        order = rng.permutation(n_det)
        report = evaluate([dets[k] for k in order], gts, EvalConfig(mode="bbox"))
        ap = report.bbox.classes[1].ap
        worst = max(worst, abs(ap - oracles.prefix_average_precision(flags.tolist(), n_gt)))
    return Outcome(max_deviation=worst, cases=n)


@suite("evaluator_invariance", tolerance=0.0)
def evaluator_invariance(rng: np.random.Generator, options: SelfCheckOptions) -> Outcome:
    """Reports do not change under input shuffling or a monotone rescaling of scores."""
    items = _dataset(options.cases(20), options.seed)
    gts = _ground_truths(items)
    dets = []
    for g in gts:
        shift = int(rng.integers(-6, 7))
        box = g.box.translate(shift, 0.0)
        dets.append(
            Detection(
                image_id=g.image_id,
                class_id=g.class_id,
                score=float(rng.uniform(0.05, 1)),
                box=box,
                mask=np.roll(g.mask, shift, axis=1),
            )
        )
        if rng.random() < 0.3:
            dets.append(replace(dets[-1], score=float(rng.uniform(0.05, 1))))

    base = report_to_dict(evaluate(dets, gts, EvalConfig()))
    changed = 0
    for _ in range(3):
        shuffled_dets = [replace(dets[k], score=dets[k].score ** 2 * 0.5) for k in rng.permutation(len(dets))]
        shuffled_gts = [gts[k] for k in rng.permutation(len(gts))]
        changed += report_to_dict(evaluate(shuffled_dets, shuffled_gts, EvalConfig())) != base
    return Outcome(max_deviation=float(changed), cases=3)
