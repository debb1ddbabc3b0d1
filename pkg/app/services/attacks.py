"""
Benign image operations and tamper proxies.

Every attack is a pure function of (image, spec): stochastic ones carry their
own seed, and the output always has the input's dimensions.
"""
import io
from enum import Enum
from typing import FrozenSet, Optional, Tuple

import numpy as np
from PIL import Image
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy import ndimage

from app.config import (
    PATCH_SIZE,
    DEFAULT_BLUR_KERNEL,
    DEFAULT_BLUR_SIGMA,
    DEFAULT_JPEG_QUALITY,
    DEFAULT_MEDIAN_KERNEL,
    DEFAULT_NOISE_SIGMA,
    DEFAULT_PERTURB_STRENGTH,
    DEFAULT_RESIZE_SCALE,
)
from app.utils import image_utils, patch_utils
from app.utils.exceptions import ParameterError
from app.utils.logger import get_logger
from app.utils.patch_utils import PatchCoord

logger = get_logger(__name__)

Rectangle = Tuple[int, int, int, int]  # (x, y, width, height) in pixels


class AttackName(str, Enum):
    IDENTITY = "identity"
    JPEG = "jpeg"
    GAUSSIAN_NOISE = "gaussian_noise"
    GAUSSIAN_BLUR = "gaussian_blur"
    MEDIAN_BLUR = "median_blur"
    RESIZE = "resize"
    CROP_PATCHES = "crop_patches"
    SPLICE = "splice"
    GLOBAL_PERTURB = "global_perturb"


class AttackSpec(BaseModel):
    """A named manipulation with its parameters; unused fields are ignored."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    name: AttackName = AttackName.IDENTITY
    quality: int = Field(default=DEFAULT_JPEG_QUALITY, ge=1, le=100)
    sigma: float = Field(default=DEFAULT_NOISE_SIGMA, gt=0, le=1.0)
    kernel: int = Field(default=DEFAULT_BLUR_KERNEL, ge=3, le=15)
    blur_sigma: float = Field(default=DEFAULT_BLUR_SIGMA, gt=0, le=10.0)
    scale: float = Field(default=DEFAULT_RESIZE_SCALE, gt=0, lt=1.0)
    rect: Optional[Rectangle] = None
    fill: int = Field(default=0, ge=0, le=255)
    donor: Optional[np.ndarray] = Field(default=None, repr=False)
    strength: float = Field(default=DEFAULT_PERTURB_STRENGTH, gt=0, le=5.0)
    seed: int = 0

    @model_validator(mode="after")
    def _check_fields(self):
        if self.name in (AttackName.GAUSSIAN_BLUR, AttackName.MEDIAN_BLUR) and self.kernel % 2 == 0:
            raise ValueError(f"kernel size must be odd, got {self.kernel}")
        if self.name in (AttackName.CROP_PATCHES, AttackName.SPLICE) and self.rect is None:
            raise ValueError(f"{self.name.value} needs a rectangle")
        if self.name is AttackName.SPLICE and self.donor is None:
            raise ValueError("splice needs a donor image")
        return self

    def label(self) -> str:
        """Short name used in reports, e.g. jpeg80 or crop3x3."""
        if self.name is AttackName.JPEG:
            return f"jpeg{self.quality}"
        if self.name is AttackName.GAUSSIAN_NOISE:
            return f"noise{round(self.sigma * 255, 2):g}"
        if self.name is AttackName.GAUSSIAN_BLUR:
            return f"blur{self.kernel}"
        if self.name is AttackName.MEDIAN_BLUR:
            return f"median{self.kernel}"
        if self.name is AttackName.RESIZE:
            return f"resize{self.scale:g}"
        if self.name in (AttackName.CROP_PATCHES, AttackName.SPLICE):
            _, _, w, h = self.rect
            prefix = "crop" if self.name is AttackName.CROP_PATCHES else "splice"
            return f"{prefix}{w // PATCH_SIZE}x{h // PATCH_SIZE}"
        if self.name is AttackName.GLOBAL_PERTURB:
            return f"perturb{self.strength:g}"
        return self.name.value

    def params(self) -> str:
        """Canonical parameter string for CSV rows."""
        n = self.name
        if n is AttackName.JPEG:
            return f"quality={self.quality}"
        if n is AttackName.GAUSSIAN_NOISE:
            return f"sigma={self.sigma:.6f};seed={self.seed}"
        if n is AttackName.GAUSSIAN_BLUR:
            return f"kernel={self.kernel};sigma={self.blur_sigma:g}"
        if n is AttackName.MEDIAN_BLUR:
            return f"kernel={self.kernel}"
        if n is AttackName.RESIZE:
            return f"scale={self.scale:g}"
        if n is AttackName.CROP_PATCHES:
            return "rect={}x{}+{}+{};fill={}".format(self.rect[2], self.rect[3], self.rect[0], self.rect[1], self.fill)
        if n is AttackName.SPLICE:
            return "rect={}x{}+{}+{}".format(self.rect[2], self.rect[3], self.rect[0], self.rect[1])
        if n is AttackName.GLOBAL_PERTURB:
            return f"strength={self.strength:g};seed={self.seed}"
        return ""


def jpeg(img: np.ndarray, quality: int) -> np.ndarray:
    buf = io.BytesIO()
    Image.fromarray(img).save(buf, format="JPEG", quality=quality)
    buf.seek(0)
    with Image.open(buf) as im:
        return np.array(im.convert("RGB"), dtype=np.uint8)


def gaussian_noise(img: np.ndarray, sigma: float, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    noise = rng.normal(0.0, sigma * 255.0, size=img.shape)
    return image_utils.to_uint8(img.astype(np.float64) + noise)


def gaussian_blur(img: np.ndarray, kernel: int, sigma: float) -> np.ndarray:
    # mode="nearest" 即 edge-replicate padding
    out = ndimage.gaussian_filter(
        img.astype(np.float64), sigma=(sigma, sigma, 0), radius=kernel // 2, mode="nearest"
    )
    return image_utils.to_uint8(out)


def median_blur(img: np.ndarray, kernel: int) -> np.ndarray:
    return ndimage.median_filter(img, size=(kernel, kernel, 1), mode="nearest")


def resize(img: np.ndarray, scale: float) -> np.ndarray:
    h, w = img.shape[:2]
    small = (max(1, round(w * scale)), max(1, round(h * scale)))
    im = Image.fromarray(img).resize(small, Image.BILINEAR).resize((w, h), Image.BILINEAR)
    return np.array(im, dtype=np.uint8)


def crop_patches(img: np.ndarray, rect: Rectangle, fill: int = 0) -> np.ndarray:
    patch_utils.check_patch_rectangle(rect, img.shape[0])
    x, y, w, h = rect
    out = img.copy()
    out[y:y + h, x:x + w] = fill
    return out


def splice(img: np.ndarray, donor: np.ndarray, rect: Rectangle) -> np.ndarray:
    patch_utils.check_patch_rectangle(rect, img.shape[0])
    image_utils.ensure_rgb(donor)
    x, y, w, h = rect
    if donor.shape[0] < y + h or donor.shape[1] < x + w:
        raise ParameterError(f"donor of shape {donor.shape} does not cover rectangle {rect}")
    out = img.copy()
    out[y:y + h, x:x + w] = donor[y:y + h, x:x + w]
    return out


def global_perturb(img: np.ndarray, strength: float, seed: int) -> np.ndarray:
    """Whole-frame smoothing plus a seeded 1-2 pixel translation."""
    rng = np.random.default_rng(seed)
    blurred = ndimage.gaussian_filter(img.astype(np.float64), sigma=(strength, strength, 0), mode="nearest")
    dy, dx = 0, 0
    while dy == 0 and dx == 0:
        dy, dx = (int(v) for v in rng.integers(-2, 3, size=2))
    shifted = ndimage.shift(blurred, (dy, dx, 0), order=0, mode="nearest")
    return image_utils.to_uint8(shifted)


def apply(img: np.ndarray, spec: AttackSpec) -> np.ndarray:
    image_utils.ensure_rgb(img)
    name = spec.name
    if name is AttackName.IDENTITY:
        out = img.copy()
    elif name is AttackName.JPEG:
        out = jpeg(img, spec.quality)
    elif name is AttackName.GAUSSIAN_NOISE:
        out = gaussian_noise(img, spec.sigma, spec.seed)
    elif name is AttackName.GAUSSIAN_BLUR:
        out = gaussian_blur(img, spec.kernel, spec.blur_sigma)
    elif name is AttackName.MEDIAN_BLUR:
        out = median_blur(img, spec.kernel)
    elif name is AttackName.RESIZE:
        out = resize(img, spec.scale)
    elif name is AttackName.CROP_PATCHES:
        out = crop_patches(img, spec.rect, spec.fill)
    elif name is AttackName.SPLICE:
        out = splice(img, spec.donor, spec.rect)
    elif name is AttackName.GLOBAL_PERTURB:
        out = global_perturb(img, spec.strength, spec.seed)
    else:
        raise ParameterError(f"Unsupported attack: {name}")

    if out.shape != img.shape:
        raise ParameterError(f"attack {name.value} changed the image shape to {out.shape}")
    logger.debug(f"Applied {spec.label()} ({spec.params()})")
    return out


def tampered_patches(spec: AttackSpec) -> FrozenSet[PatchCoord]:
    """Patches an attack destroys by construction (crop / splice ground truth)."""
    if spec.name in (AttackName.CROP_PATCHES, AttackName.SPLICE):
        return patch_utils.rectangle_patches(spec.rect)
    return frozenset()


def crop_spec(px: int, py: int, width: int, height: Optional[int] = None, fill: int = 0) -> AttackSpec:
    height = width if height is None else height
    return AttackSpec(
        name=AttackName.CROP_PATCHES,
        rect=patch_utils.patch_rectangle(px, py, width, height),
        fill=fill,
    )


def splice_spec(donor: np.ndarray, px: int, py: int, width: int, height: Optional[int] = None) -> AttackSpec:
    height = width if height is None else height
    return AttackSpec(
        name=AttackName.SPLICE,
        donor=donor,
        rect=patch_utils.patch_rectangle(px, py, width, height),
    )


def noise_donor(side: int, seed: int = 0) -> np.ndarray:
    """Uniform-noise donor image, content foreign to any corpus image."""
    rng = np.random.default_rng(seed)
    return rng.integers(0, 256, size=(side, side, 3), dtype=np.uint8)


def central_block(grid: int, size: int) -> PatchCoord:
    """Top-left patch of a centered size x size block on a grid x grid layout."""
    if not 1 <= size <= grid:
        raise ParameterError(f"block size {size} does not fit a {grid}x{grid} grid")
    offset = (grid - size) // 2
    return offset, offset
