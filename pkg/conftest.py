import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from app.services import embedder, key_service, watermark  # noqa: E402
from app.utils import image_utils  # noqa: E402

CORPUS_SIZE = 20
CORPUS_SIDE = 256


def synthetic_image(seed: int, side: int = CORPUS_SIDE) -> np.ndarray:
    """Smooth gradients and soft blobs with mild sensor noise, kept away from saturation."""
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:side, 0:side] / side
    channels = []
    for _ in range(3):
        gx, gy = rng.uniform(-60, 60, size=2)
        plane = rng.uniform(90, 160) + gx * (xx - 0.5) + gy * (yy - 0.5)
        for _ in range(4):
            cx, cy = rng.uniform(0, 1, size=2)
            radius = rng.uniform(0.08, 0.25)
            plane += rng.uniform(-35, 35) * np.exp(-((xx - cx) ** 2 + (yy - cy) ** 2) / (2 * radius * radius))
        channels.append(plane)
    img = np.stack(channels, axis=-1) + rng.normal(0, 4, size=(side, side, 3))
    return np.clip(np.rint(img), 20, 235).astype(np.uint8)


@pytest.fixture(scope="session")
def corpus():
    return {f"img{i:02d}.png": synthetic_image(i) for i in range(CORPUS_SIZE)}


@pytest.fixture(scope="session")
def base_key():
    return key_service.make_key(r=1, m=4, o=2, x0=0.31, a=3.91, k=250, d=7)


@pytest.fixture(scope="session")
def base_matrix(base_key):
    return watermark.generate(base_key)


@pytest.fixture(scope="session")
def watermarked_corpus(corpus, base_matrix):
    planes = watermark.to_channelwise(base_matrix)
    return {name: embedder.embed(img, planes) for name, img in corpus.items()}


@pytest.fixture(scope="session")
def key_file(tmp_path_factory, base_key):
    path = str(tmp_path_factory.mktemp("keys") / "base.json")
    key_service.save_key(base_key, path)
    return path


@pytest.fixture(scope="session")
def corpus_dir(tmp_path_factory, corpus):
    """First four corpus images as PNG files."""
    directory = tmp_path_factory.mktemp("corpus")
    for name in sorted(corpus)[:4]:
        image_utils.save_image(corpus[name], str(directory / name))
    return str(directory)
