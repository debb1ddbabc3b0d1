"""
Verification: compare recovered bits with the key-regenerated watermark,
decide real / fake, localize tampered patches and aggregate results.
"""
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict
from scipy.stats import rankdata

from app.config import DEFAULT_TAU, PATCH_SIZE
from app.services.embedder import SoftRecovery
from app.services.watermark import WatermarkMatrix, to_channelwise
from app.utils import image_utils, patch_utils
from app.utils.exceptions import ParameterError
from app.utils.patch_utils import PatchCoord

OVERLAY_ALPHA = 0.5
RED = np.array([255, 0, 0], dtype=np.float64)
GREEN = np.array([0, 255, 0], dtype=np.float64)


class Label(str, Enum):
    REAL = "Real"
    FAKE = "Fake"


@dataclass(frozen=True)
class RecoveryReport:
    match_mask: np.ndarray  # [py, px] True where all 4 bits of the entry are right
    bit_rate: float
    patch_rate: float

    @property
    def n(self) -> int:
        return int(self.match_mask.shape[0]).bit_length() - 1


class Verdict(BaseModel):
    model_config = ConfigDict(frozen=True)

    label: Label
    score: float
    tau: float


@dataclass(frozen=True)
class LocalizationMask:
    flags: np.ndarray  # [py, px] True where the entry mismatched
    overlay: Optional[np.ndarray] = None

    def tampered(self) -> frozenset:
        ys, xs = np.nonzero(self.flags)
        return frozenset(zip(xs.tolist(), ys.tolist()))

    def to_bitstring(self) -> str:
        return "".join("1" if f else "0" for f in self.flags.ravel().tolist())


def compare(expected: WatermarkMatrix, recovered: SoftRecovery) -> RecoveryReport:
    planes = to_channelwise(expected).planes
    bits = recovered.hard_bits
    if planes.shape != bits.shape:
        raise ParameterError(f"expected bits {planes.shape} do not match recovered bits {bits.shape}")

    correct = planes == bits
    match_mask = correct.all(axis=0)
    return RecoveryReport(
        match_mask=match_mask,
        bit_rate=float(correct.mean()),
        patch_rate=float(match_mask.mean()),
    )


def decide(report: RecoveryReport, tau: float = DEFAULT_TAU) -> Verdict:
    if not 0.0 < tau < 1.0:
        raise ParameterError(f"threshold must lie in (0, 1), got {tau}")
    label = Label.REAL if report.patch_rate >= tau else Label.FAKE
    return Verdict(label=label, score=report.patch_rate, tau=tau)


def localization_map(report: RecoveryReport) -> LocalizationMask:
    return LocalizationMask(flags=~report.match_mask)


def _blend(img: np.ndarray, region: np.ndarray, color: np.ndarray) -> None:
    img[region] = OVERLAY_ALPHA * img[region] + (1.0 - OVERLAY_ALPHA) * color


def _pixel_mask(grid: np.ndarray) -> np.ndarray:
    return np.kron(grid, np.ones((PATCH_SIZE, PATCH_SIZE), dtype=bool)).astype(bool)


def _check_overlay_shape(img: np.ndarray, grid: np.ndarray) -> None:
    image_utils.ensure_rgb(img)
    side = grid.shape[0] * PATCH_SIZE
    if img.shape[:2] != (side, side):
        raise ParameterError(f"mask of {grid.shape[0]}x{grid.shape[0]} patches needs a {side}x{side} image")


def render_overlay(img: np.ndarray, mask: LocalizationMask) -> np.ndarray:
    """Tampered patches under a 50%-alpha red overlay; the rest untouched."""
    _check_overlay_shape(img, mask.flags)
    if not mask.flags.any():
        return img.copy()
    out = img.astype(np.float64)
    _blend(out, _pixel_mask(mask.flags), RED)
    return image_utils.to_uint8(out)


def render_crop_overlay(img: np.ndarray, report: RecoveryReport, cropped: Iterable[PatchCoord]) -> np.ndarray:
    """
    Cropped ground truth stays black; correct localizations get green,
    wrong ones (missed crops, false flags) red.
    """
    _check_overlay_shape(img, report.match_mask)
    truth = patch_utils.patch_mask(cropped, report.n)
    flags = ~report.match_mask
    out = img.astype(np.float64)
    out[_pixel_mask(truth)] = 0.0
    _blend(out, _pixel_mask(flags == truth), GREEN)
    _blend(out, _pixel_mask(flags != truth), RED)
    return image_utils.to_uint8(out)


def cumulative_heatmap(reports: Sequence[RecoveryReport]) -> np.ndarray:
    """Per-position mismatch counts normalized by the largest count."""
    if not reports:
        raise ParameterError("cumulative heatmap needs at least one report")
    shape = reports[0].match_mask.shape
    if any(r.match_mask.shape != shape for r in reports):
        raise ParameterError("all reports must share the same grid size")

    counts = np.sum([~r.match_mask for r in reports], axis=0).astype(np.float64)
    peak = counts.max()
    return counts / peak if peak > 0 else counts


def auc(real_scores: Sequence[float], fake_scores: Sequence[float]) -> float:
    """P(real > fake) with ties counted half (Mann-Whitney U / n1 n2)."""
    real = np.asarray(real_scores, dtype=np.float64)
    fake = np.asarray(fake_scores, dtype=np.float64)
    if real.size == 0 or fake.size == 0:
        raise ParameterError("AUC needs at least one real and one fake score")

    ranks = rankdata(np.concatenate([real, fake]))
    u = ranks[: real.size].sum() - real.size * (real.size + 1) / 2.0
    return float(u / (real.size * fake.size))


def cropping_correctness(report: RecoveryReport, cropped: Iterable[PatchCoord]) -> float:
    """Share of patches behaving as expected: cropped ones lost, the rest intact."""
    truth = patch_utils.patch_mask(cropped, report.n)
    flags = ~report.match_mask
    return float((flags == truth).mean())
