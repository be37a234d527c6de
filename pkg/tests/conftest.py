import sys
from pathlib import Path

import numpy as np
from PIL import Image
import pytest

# Tests import the shared oracle module by file location.
sys.path.insert(0, str(Path(__file__).parent))


def synthetic_photo(height: int, width: int, seed: int) -> np.ndarray:
    """A deterministic photo-like test image: smooth gradients plus fine detail."""
    rng = np.random.default_rng(seed)
    ys = np.linspace(0, 1, height)[:, None]
    xs = np.linspace(0, 1, width)[None, :]
    r = 0.25 + 0.5 * ys + 0.1 * np.sin(6 * np.pi * xs)
    g = 0.35 + 0.4 * xs + 0.0 * ys
    b = 0.55 - 0.3 * ys * xs
    image = np.stack([r, g, b], axis=-1)
    # blocks and thin lines give the edge metrics something to measure
    y0, x0 = height // 4, width // 4
    image[y0 : y0 + height // 3, x0 : x0 + width // 3] *= 0.4
    image[:, :: max(4, width // 8)] = 0.9
    image += rng.normal(0, 0.01, image.shape)
    return (np.clip(image, 0, 1) * 255).astype(np.uint8)


@pytest.fixture
def photo_factory(tmp_path):
    def make(name: str, height: int = 48, width: int = 48, seed: int = 0) -> str:
        path = tmp_path / name
        Image.fromarray(synthetic_photo(height, width, seed)).save(path)
        return str(path)

    return make
