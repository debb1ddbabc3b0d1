import os
from typing import Dict

import numpy as np
from PIL import Image, UnidentifiedImageError

from app.utils.exceptions import FileAccessError, ParameterError

# ITU-R BT.601 luma weights
LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114], dtype=np.float64)

IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg", ".bmp", ".tif", ".tiff", ".webp")


def ensure_rgb(img: np.ndarray) -> np.ndarray:
    """Validate an ImageBuffer: (H, W, 3) uint8."""
    if not isinstance(img, np.ndarray) or img.ndim != 3 or img.shape[2] != 3:
        shape = getattr(img, "shape", None)
        raise ParameterError(f"expected an RGB image of shape (H, W, 3), got {shape}")
    if img.dtype != np.uint8:
        raise ParameterError(f"expected 8-bit pixels, got dtype {img.dtype}")
    return img


def to_uint8(values: np.ndarray) -> np.ndarray:
    return np.clip(np.rint(values), 0, 255).astype(np.uint8)


def luminance(img: np.ndarray) -> np.ndarray:
    return img.astype(np.float64) @ LUMA_WEIGHTS


def load_image(path: str) -> np.ndarray:
    try:
        with Image.open(path) as im:
            return np.array(im.convert("RGB"), dtype=np.uint8)
    except (FileNotFoundError, UnidentifiedImageError, OSError) as e:
        raise FileAccessError(f"cannot read image {path}: {e}") from e


def save_image(img: np.ndarray, path: str) -> None:
    """PNG unless the suffix asks for something else."""
    ensure_rgb(img)
    try:
        parent = os.path.dirname(path)
        if parent:
            os.makedirs(parent, exist_ok=True)
        Image.fromarray(img).save(path)
    except (OSError, ValueError) as e:
        raise FileAccessError(f"cannot write image {path}: {e}") from e


def load_corpus(directory: str) -> Dict[str, np.ndarray]:
    """Every decodable image in a flat directory, keyed and ordered by file name."""
    if not os.path.isdir(directory):
        raise FileAccessError(f"corpus directory {directory} does not exist")
    names = sorted(f for f in os.listdir(directory) if f.lower().endswith(IMAGE_SUFFIXES))
    return {name: load_image(os.path.join(directory, name)) for name in names}


def center_crop_resize(img: np.ndarray, side: int) -> np.ndarray:
    """Largest centered square, resized to side x side."""
    ensure_rgb(img)
    h, w = img.shape[:2]
    s = min(h, w)
    top, left = (h - s) // 2, (w - s) // 2
    square = Image.fromarray(img[top:top + s, left:left + s])
    if s != side:
        square = square.resize((side, side), Image.BICUBIC)
    return np.array(square, dtype=np.uint8)
