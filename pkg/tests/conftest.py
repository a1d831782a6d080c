import numpy as np
import pytest

from magniglyph import Mask, Raster


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_raster(rng, width, height) -> Raster:
    return Raster(rng.integers(0, 256, size=(height, width, 3), dtype=np.uint8))


def random_mask(rng, width, height, density=0.5) -> Mask:
    return Mask(rng.random((height, width)) < density)
