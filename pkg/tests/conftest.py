import numpy as np
import pytest

from imaging import SynthSpec, synth_dataset


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture
def make_boxes(rng):
    """Random valid (n, 4) boxes inside an extent x extent square."""

    def _make(n: int, extent: float = 100.0) -> np.ndarray:
        x1 = rng.uniform(0, extent, n)
        y1 = rng.uniform(0, extent, n)
        w = rng.uniform(1, extent / 2, n)
        h = rng.uniform(1, extent / 2, n)
        return np.stack([x1, y1, x1 + w, y1 + h], axis=1)

    return _make


@pytest.fixture(scope="session")
def small_dataset():
    """Four 96x96 synthetic images with masks."""
    return synth_dataset(4, SynthSpec(width=96, height=96, mean_diameter=14.0), seed=7)
