"""
Entry-to-patch embedding.

Each 4-bit watermark entry (x, y) lives in the 32x32 image patch at the same
grid position. The default backend writes the four bits by quantization index
modulation (QIM) on four fixed coefficients of the patch's orthonormal 2-D DCT
of luminance: even multiples of delta carry 0, odd multiples carry 1. The
luminance change is added equally to R, G and B, so chroma is untouched.
Every patch is processed independently of its neighbours.
"""
import math
from dataclasses import dataclass
from typing import Literal, Optional, Protocol, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator
from scipy.fft import dctn, idctn
from skimage.metrics import peak_signal_noise_ratio, structural_similarity

from app.config import DEFAULT_COEFF_SLOTS, DEFAULT_DELTA, ENTRY_BITS, PATCH_SIZE, REFINE_ROUNDS
from app.services.watermark import ChannelwiseWatermark
from app.utils import image_utils, patch_utils
from app.utils.exceptions import ParameterError
from app.utils.logger import get_logger

logger = get_logger(__name__)


class EmbedConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    delta: float = Field(default=DEFAULT_DELTA, gt=0)
    coeff_slots: Tuple[Tuple[int, int], ...] = DEFAULT_COEFF_SLOTS
    channel_policy: Literal["luminance"] = "luminance"
    refine_rounds: int = Field(default=REFINE_ROUNDS, ge=0, le=16)

    @field_validator("coeff_slots")
    @classmethod
    def _check_slots(cls, slots):
        if len(slots) != ENTRY_BITS:
            raise ValueError(f"need exactly {ENTRY_BITS} coefficient slots, got {len(slots)}")
        if len(set(slots)) != len(slots):
            raise ValueError(f"coefficient slots must be distinct: {slots}")
        for u, v in slots:
            if not (0 <= u < PATCH_SIZE and 0 <= v < PATCH_SIZE):
                raise ValueError(f"slot {(u, v)} lies outside the {PATCH_SIZE}x{PATCH_SIZE} transform")
            if (u, v) == (0, 0):
                raise ValueError("the DC coefficient cannot carry watermark bits")
        return slots


@dataclass(frozen=True)
class SoftRecovery:
    confidence: np.ndarray  # (4, 2^n, 2^n) in [0, 1], plane order as the watermark

    @property
    def hard_bits(self) -> np.ndarray:
        return (self.confidence >= 0.5).astype(np.uint8)

    @property
    def n(self) -> int:
        return int(self.confidence.shape[-1]).bit_length() - 1


class EmbeddingBackend(Protocol):
    """Anything that can write and read the channel-wise watermark patch by patch."""

    def embed(self, img: np.ndarray, w: ChannelwiseWatermark, cfg: EmbedConfig) -> np.ndarray: ...

    def extract(self, img: np.ndarray, n: int, cfg: EmbedConfig) -> SoftRecovery: ...


def qim_quantize(coeffs: np.ndarray, bits: np.ndarray, delta: float) -> np.ndarray:
    """Nearest even (bit 0) or odd (bit 1) multiple of delta."""
    offset = bits * delta
    return 2.0 * delta * np.round((coeffs - offset) / (2.0 * delta)) + offset


def qim_confidence(coeffs: np.ndarray, delta: float) -> np.ndarray:
    """Confidence that a coefficient carries bit 1: distance to the even lattice over delta."""
    d_even = np.abs(coeffs - 2.0 * delta * np.round(coeffs / (2.0 * delta)))
    return np.clip(d_even / delta, 0.0, 1.0)


def patch_coefficients(img: np.ndarray, cfg: EmbedConfig) -> np.ndarray:
    """Slot coefficients of every patch, shape (4, gy, gx)."""
    patches = patch_utils.to_patches(image_utils.luminance(img))
    spectrum = dctn(patches, axes=(2, 3), norm="ortho")
    rows, cols = zip(*cfg.coeff_slots)
    return np.moveaxis(spectrum[:, :, list(rows), list(cols)], -1, 0)


def _luminance_shift(shift: np.ndarray, cfg: EmbedConfig) -> np.ndarray:
    """Spatial luminance change produced by per-patch slot shifts (4, gy, gx)."""
    gy, gx = shift.shape[1:]
    spectrum = np.zeros((gy, gx, PATCH_SIZE, PATCH_SIZE), dtype=np.float64)
    for b, (u, v) in enumerate(cfg.coeff_slots):
        spectrum[:, :, u, v] = shift[b]
    return patch_utils.from_patches(idctn(spectrum, axes=(2, 3), norm="ortho"))


class DctQimBackend:
    """Deterministic transform-domain backend."""

    def embed(self, img: np.ndarray, w: ChannelwiseWatermark, cfg: EmbedConfig) -> np.ndarray:
        image_utils.ensure_rgb(img)
        patch_utils.check_image_order(img, w.n)
        bits = w.planes.astype(np.float64)

        out = img
        for attempt in range(cfg.refine_rounds + 1):
            coeffs = patch_coefficients(out, cfg)
            target = qim_quantize(coeffs, bits, cfg.delta)
            if attempt > 0:
                # 只修正 rounding / clipping 後偏離太多的 patch
                conf = qim_confidence(coeffs, cfg.delta)
                settled = (np.abs(conf - bits) <= 0.25).all(axis=0)
                if settled.all():
                    break
                target = np.where(settled[None], coeffs, target)
            shift = target - coeffs
            out = image_utils.to_uint8(out.astype(np.float64) + _luminance_shift(shift, cfg)[:, :, None])

        wrong = int((self.extract(out, w.n, cfg).hard_bits != w.planes).any(axis=0).sum())
        if wrong:
            logger.warning(f"{wrong} saturated patches could not hold their entry")
        return out

    def extract(self, img: np.ndarray, n: int, cfg: EmbedConfig) -> SoftRecovery:
        image_utils.ensure_rgb(img)
        patch_utils.check_image_order(img, n)
        return SoftRecovery(qim_confidence(patch_coefficients(img, cfg), cfg.delta))


DEFAULT_BACKEND: EmbeddingBackend = DctQimBackend()


def embed(
    img: np.ndarray,
    w: ChannelwiseWatermark,
    cfg: Optional[EmbedConfig] = None,
    backend: Optional[EmbeddingBackend] = None,
) -> np.ndarray:
    cfg = cfg or EmbedConfig()
    return (backend or DEFAULT_BACKEND).embed(img, w, cfg)


def extract(
    img: np.ndarray,
    n: int,
    cfg: Optional[EmbedConfig] = None,
    backend: Optional[EmbeddingBackend] = None,
) -> SoftRecovery:
    cfg = cfg or EmbedConfig()
    return (backend or DEFAULT_BACKEND).extract(img, n, cfg)


def _check_pair(a: np.ndarray, b: np.ndarray) -> None:
    image_utils.ensure_rgb(a)
    image_utils.ensure_rgb(b)
    if a.shape != b.shape:
        raise ParameterError(f"image shapes differ: {a.shape} vs {b.shape}")


def psnr(a: np.ndarray, b: np.ndarray) -> float:
    """Peak signal-to-noise ratio in dB; math.inf for identical images."""
    _check_pair(a, b)
    if np.array_equal(a, b):
        return math.inf
    return float(peak_signal_noise_ratio(a, b, data_range=255))


def ssim(a: np.ndarray, b: np.ndarray) -> float:
    """Mean SSIM of the luminance channel (7x7 windows)."""
    _check_pair(a, b)
    return float(structural_similarity(image_utils.luminance(a), image_utils.luminance(b), data_range=255.0))
