import numpy as np
import pytest

from lpseg.features import N_FEATURES
from lpseg.seeds import decode_ground_truth, decode_trimap


def color_only_lambda() -> np.ndarray:
    """Weights that keep the pointwise color features only.

    Grid position and window statistics are zeroed, so every pixel of a flat
    color region shares one exact feature vector and the two tones of the
    fixtures below are separable by construction.
    """
    lam = np.zeros(N_FEATURES)
    lam[2:11] = 1.0  # r, g, b, h, s, v, exr, exg, exb
    return lam


def two_tone_fixture(height: int, width: int, seeds_per_class: int = 5):
    """Left/right two-tone image with interior seeds and exact ground truth."""
    image = np.empty((height, width, 3))
    image[:, : width // 2] = (0.85, 0.15, 0.10)
    image[:, width // 2 :] = (0.10, 0.25, 0.90)
    trimap = np.full((height, width), 128, dtype=np.uint8)
    step = max(1, height // (seeds_per_class + 2))
    for i in range(seeds_per_class):
        trimap[2 + i * step, width // 4] = 255
        trimap[2 + i * step, 3 * width // 4] = 64
    gt = np.zeros((height, width), dtype=np.uint8)
    gt[:, : width // 2] = 255
    return image, trimap, gt


@pytest.fixture
def two_tone_16():
    image, trimap, gt = two_tone_fixture(16, 16, seeds_per_class=3)
    return image, decode_trimap(trimap), decode_ground_truth(gt)


@pytest.fixture
def two_tone_64():
    image, trimap, gt = two_tone_fixture(64, 64, seeds_per_class=5)
    return image, decode_trimap(trimap), decode_ground_truth(gt)


@pytest.fixture(params=["numba", "numpy"])
def any_backend(request, monkeypatch):
    monkeypatch.setenv("LPSEG_BACKEND", request.param)
    return request.param
