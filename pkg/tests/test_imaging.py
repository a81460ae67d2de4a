import numpy as np
import pytest
from pydantic import ValidationError

from errors import ContractError
from geometry import Box
from imaging import (
    CROP_KEEP_FRACTION,
    AnnotatedImage,
    Annotation,
    AugmentSpec,
    SynthSpec,
    augment,
    flip,
    flip_box,
    gaussian_blur,
    gaussian_kernel,
    gaussian_noise,
    mask_extent,
    noise_sigma,
    random_crop,
    read_mask_png,
    read_png,
    resize_and_pad,
    synth_dataset,
    train_test_split,
    write_mask_png,
    write_png,
)
from masks import trace_regions


def _item(width: int = 20, height: int = 10) -> AnnotatedImage:
    image = np.arange(width * height, dtype=np.float64).reshape(height, width)
    mask = np.zeros((height, width), dtype=bool)
    mask[2:5, 3:7] = True
    return AnnotatedImage(image_id="img", image=image, annotations=(Annotation(box=Box(3, 2, 7, 5), mask=mask),))


def _tight_box(mask: np.ndarray) -> tuple[float, float, float, float]:
    ys, xs = np.argwhere(mask).T
    return (float(xs.min()), float(ys.min()), float(xs.max() + 1), float(ys.max() + 1))


# ====================================================================
# Resize, pad and flip
# ====================================================================


def test_resize_and_pad_wide_image():
    item = AnnotatedImage(
        image_id="wide",
        image=np.full((512, 1024), 100.0),
        annotations=(Annotation(box=Box(100, 50, 300, 250)),),
    )
    resized, record = resize_and_pad(item)
    assert resized.image.shape == (768, 768)
    assert (record.content_w, record.content_h) == (768, 384)
    assert record.scale == pytest.approx(0.75)
    assert resized.boxes[0].as_tuple() == pytest.approx((75.0, 37.5, 225.0, 187.5))
    assert np.all(resized.image[384:] == 0.0)
    assert record.to_original(resized.boxes[0]).as_tuple() == pytest.approx((100, 50, 300, 250))
    assert record.to_resized(item.boxes[0]).as_tuple() == pytest.approx(resized.boxes[0].as_tuple())


def test_resize_and_pad_refits_box_to_resized_mask():
    mask = np.zeros((300, 1000), dtype=bool)
    mask[101:148, 333:377] = True
    item = AnnotatedImage(
        image_id="odd", image=np.zeros((300, 1000)), annotations=(Annotation(box=Box(333, 101, 377, 148), mask=mask),)
    )
    resized, record = resize_and_pad(item)
    assert record.scale == pytest.approx(0.768)
    ann = resized.annotations[0]
    assert ann.box.as_tuple() == _tight_box(ann.mask)
    assert ann.box.as_tuple() == pytest.approx(record.to_resized(item.boxes[0]).as_tuple(), abs=1.0)


def test_resize_and_pad_small_image_only_pads():
    item = _item()
    padded, record = resize_and_pad(item, target=32)
    assert record.scale == 1.0
    assert np.array_equal(padded.image[:10, :20], item.image)
    assert padded.boxes == item.boxes
    assert padded.annotations[0].mask.shape == (32, 32)

    upscaled, record = resize_and_pad(item, target=40, upscale=True)
    assert record.scale == pytest.approx(2.0)
    assert upscaled.boxes[0] == Box(6, 4, 14, 10)


def test_flip_box():
    assert flip_box(Box(1, 2, 3, 4), "horizontal", 10, 8) == Box(7, 2, 9, 4)
    assert flip_box(Box(1, 2, 3, 4), "vertical", 10, 8) == Box(1, 4, 3, 6)


@pytest.mark.parametrize("axis", ["horizontal", "vertical"])
def test_flip_moves_mask_with_box(axis):
    flipped = flip(_item(), axis)
    ann = flipped.annotations[0]
    (region,) = trace_regions(ann.mask)
    assert region.box == ann.box
    twice = flip(flipped, axis)
    assert np.array_equal(twice.image, _item().image)
    assert twice.boxes == _item().boxes


def test_flip_rejects_unknown_axis():
    with pytest.raises(ValueError):
        flip(_item(), "diagonal")


def test_annotated_image_rejects_box_outside():
    with pytest.raises(ContractError):
        AnnotatedImage(image_id="x", image=np.zeros((5, 5)), annotations=(Annotation(box=Box(0, 0, 6, 5)),))


# ====================================================================
# Blur and noise
# ====================================================================


def test_gaussian_kernel():
    kernel = gaussian_kernel(1.0)
    assert len(kernel) == 7
    assert kernel.sum() == pytest.approx(1.0)
    assert np.array_equal(kernel, kernel[::-1])
    with pytest.raises(ContractError):
        gaussian_kernel(0.0)


def test_blur_keeps_flat_images():
    flat = np.full((15, 12), 87.0)
    assert np.allclose(gaussian_blur(flat, 1.5), flat, atol=1e-12)


def test_blur_impulse_response_is_kernel_outer_product():
    img = np.zeros((21, 21))
    img[10, 10] = 1.0
    kernel = gaussian_kernel(1.0)
    out = gaussian_blur(img, 1.0)
    assert np.allclose(out[7:14, 7:14], np.outer(kernel, kernel), atol=1e-12)


def test_noise_sigma_scales_with_range():
    img = np.array([[10.0, 20.0], [30.0, 210.0]])
    assert noise_sigma(img, 0.05) == pytest.approx(10.0)


def test_gaussian_noise_statistics():
    img = np.full((400, 400), 127.5)
    img[0, 0] = 0.0
    img[0, 1] = 255.0
    noisy = gaussian_noise(img, 0.05, seed=5)
    assert noisy.min() >= 0.0 and noisy.max() <= 255.0
    diff = (noisy - img)[1:, :]
    assert diff.std() == pytest.approx(12.75, rel=0.02)
    assert abs(diff.mean()) < 0.2
    assert np.array_equal(noisy, gaussian_noise(img, 0.05, seed=5))


def test_gaussian_noise_on_flat_image_is_identity():
    flat = np.full((4, 4), 3.0)
    assert np.array_equal(gaussian_noise(flat), flat)
    with pytest.raises(ContractError):
        gaussian_noise(flat, -0.1)


# ====================================================================
# Crop and augment
# ====================================================================


def test_random_crop_keeps_boxes_in_window():
    item = _item(40, 40)
    cropped = random_crop(item, 0.5, seed=2)
    assert cropped.image.shape == (20, 20)
    for ann in cropped.annotations:
        assert 0 <= ann.box.x1 < ann.box.x2 <= 20
        assert ann.mask.shape == (20, 20)
        assert ann.box == mask_extent(ann.mask)


def test_mask_extent():
    mask = np.zeros((6, 8), dtype=bool)
    mask[1, 2] = mask[4, 6] = True
    assert mask_extent(mask).as_tuple() == (2.0, 1.0, 7.0, 5.0)
    assert mask_extent(np.zeros((3, 3), dtype=bool)) is None


def test_random_crop_refits_boxes_to_cropped_masks():
    # An L-shaped defect: a cut through the corner leaves a mask much smaller than the clipped box.
    mask = np.zeros((20, 20), dtype=bool)
    mask[2:14, 2:4] = True
    mask[12:14, 2:14] = True
    item = AnnotatedImage(
        image_id="l", image=np.zeros((20, 20)), annotations=(Annotation(box=Box(2, 2, 14, 14), mask=mask),)
    )
    kept = refitted = 0
    for seed in range(200):
        for ann in random_crop(item, 0.5, seed=seed).annotations:
            kept += 1
            assert ann.mask.any()
            assert ann.box.as_tuple() == _tight_box(ann.mask)
            # The keep rule looks at the clipped box; the refitted box may be far smaller.
            refitted += ann.box.area < CROP_KEEP_FRACTION * 144
    assert kept > 0
    assert refitted > 0


def test_random_crop_without_mask_clips_box():
    item = AnnotatedImage(image_id="b", image=np.zeros((40, 40)), annotations=(Annotation(box=Box(3, 2, 27, 25)),))
    for seed in range(20):
        cropped = random_crop(item, 0.5, seed=seed)
        for ann in cropped.annotations:
            assert ann.mask is None
            assert 0 <= ann.box.x1 < ann.box.x2 <= 20
            assert 0 <= ann.box.y1 < ann.box.y2 <= 20


def test_random_crop_full_window_is_identity():
    item = _item()
    cropped = random_crop(item, 1.0, seed=0)
    assert np.array_equal(cropped.image, item.image)
    assert cropped.boxes == item.boxes
    with pytest.raises(ContractError):
        random_crop(item, 0.0)


def test_augment_is_identity_at_evaluation():
    item = _item()
    assert augment(item, AugmentSpec(gaussian_noise=True), training=False) is item


def test_augment_is_deterministic_per_index():
    item = _item()
    spec = AugmentSpec(gaussian_blur=True, gaussian_noise=True, random_crop=True, seed=9)
    a = augment(item, spec, index=3)
    b = augment(item, spec, index=3)
    assert np.array_equal(a.image, b.image)
    assert a.boxes == b.boxes


def test_augment_spec_validation():
    with pytest.raises(ValidationError):
        AugmentSpec(crop_fraction=1.5)
    with pytest.raises(ValidationError):
        AugmentSpec(flip_probability=2.0)


# ====================================================================
# PNG io and synthesis
# ====================================================================


@pytest.mark.parametrize("bit_depth, peak", [(8, 255.0), (16, 4000.0)])
def test_png_round_trip(tmp_path, bit_depth, peak):
    img = np.linspace(0, peak, 60).reshape(6, 10).round()
    path = tmp_path / "img.png"
    write_png(path, img, bit_depth=bit_depth)
    assert np.array_equal(read_png(path), img)


def test_mask_png_round_trip(tmp_path):
    mask = np.zeros((5, 6), dtype=bool)
    mask[1:3, 2:5] = True
    write_mask_png(tmp_path / "m.png", mask)
    assert np.array_equal(read_mask_png(tmp_path / "m.png"), mask)


def test_synth_is_deterministic(small_dataset):
    again = synth_dataset(4, SynthSpec(width=96, height=96, mean_diameter=14.0), seed=7)
    for a, b in zip(small_dataset, again, strict=True):
        assert a.image_id == b.image_id
        assert np.array_equal(a.image, b.image)
        assert a.boxes == b.boxes


def test_synth_masks_are_single_tight_regions(small_dataset):
    assert any(item.annotations for item in small_dataset)
    for item in small_dataset:
        assert item.image.min() >= 0.0 and item.image.max() <= 255.0
        for ann in item.annotations:
            (region,) = trace_regions(ann.mask)
            assert region.box == ann.box


def test_synth_spec_validation():
    with pytest.raises(ValidationError):
        SynthSpec(min_defects=3, max_defects=1)


def test_train_test_split():
    items = list(range(10))
    train, test = train_test_split(items, 0.3, seed=1)
    assert len(test) == 3
    assert sorted(train + test) == items
    assert train == sorted(train)
    with pytest.raises(ValueError):
        train_test_split(items, 1.5)
