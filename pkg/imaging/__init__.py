"""Image preprocessing, augmentation, synthetic data and PNG IO."""

from .augment import (
    CROP_KEEP_FRACTION,
    AugmentSpec,
    augment,
    gaussian_blur,
    gaussian_kernel,
    gaussian_noise,
    noise_sigma,
    random_crop,
)
from .image import (
    TARGET_SIZE,
    AnnotatedImage,
    Annotation,
    FlipAxis,
    GrayImage,
    ScaleRecord,
    flip,
    flip_box,
    mask_extent,
    resize_and_pad,
)
from .io import read_mask_png, read_png, write_mask_png, write_png
from .synth import SynthSpec, synth_dataset, synth_image, train_test_split

__all__ = [
    "CROP_KEEP_FRACTION",
    "TARGET_SIZE",
    "AnnotatedImage",
    "Annotation",
    "AugmentSpec",
    "FlipAxis",
    "GrayImage",
    "ScaleRecord",
    "SynthSpec",
    "augment",
    "flip",
    "flip_box",
    "gaussian_blur",
    "gaussian_kernel",
    "gaussian_noise",
    "mask_extent",
    "noise_sigma",
    "random_crop",
    "read_mask_png",
    "read_png",
    "resize_and_pad",
    "synth_dataset",
    "synth_image",
    "train_test_split",
    "write_mask_png",
    "write_png",
]
