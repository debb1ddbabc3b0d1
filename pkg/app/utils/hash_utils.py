import hashlib

import numpy as np


def text_digest(text: str) -> str:
    """SHA256 of a canonical text serialization (key fingerprints)."""
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def pixel_digest(img: np.ndarray) -> str:
    """SHA256 over shape and raw pixels.

    Stable across PNG encoders, unlike a hash of the file bytes.
    """
    h = hashlib.sha256()
    h.update(repr(img.shape).encode("ascii"))
    h.update(np.ascontiguousarray(img, dtype=np.uint8).tobytes())
    return h.hexdigest()
