"""
Corpus-level experiments: the attack grid, the cropping sweep, visual quality
and the cumulative localization heatmap.

Images are processed in parallel, one task per image; results are always
reduced in file-name order so CSV output is identical across runs.
"""
import csv
import math
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Dict, List, Mapping, Optional, Sequence, TypeVar

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from app.config import DEFAULT_TAU
from app.services import attacks, detection, embedder, watermark
from app.services.attacks import AttackSpec
from app.services.detection import Label, RecoveryReport
from app.services.embedder import EmbedConfig
from app.services.watermark import WatermarkKey
from app.utils import image_utils, patch_utils, plot_utils
from app.utils.exceptions import FileAccessError, ParameterError
from app.utils.logger import get_logger

logger = get_logger(__name__)

CSV_COLUMNS = ["image", "attack", "params", "bit_rate", "patch_rate", "verdict", "tampered"]
CROP_SIZES = (1, 2, 3, 4, 5)

T = TypeVar("T")


class EvaluationRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    image: str
    attack: str
    params: str = ""
    bit_rate: float = Field(ge=0.0, le=1.0)
    patch_rate: float = Field(ge=0.0, le=1.0)
    verdict: Label
    tampered: str = Field(pattern=r"^[01]+$")

    def to_csv(self) -> Dict[str, str]:
        return {
            "image": self.image,
            "attack": self.attack,
            "params": self.params,
            "bit_rate": f"{self.bit_rate:.6f}",
            "patch_rate": f"{self.patch_rate:.6f}",
            "verdict": self.verdict.value,
            "tampered": self.tampered,
        }

    def to_report(self) -> RecoveryReport:
        side = math.isqrt(len(self.tampered))
        if side * side != len(self.tampered):
            raise ParameterError(f"row {self.image}/{self.attack}: tampered mask is not square")
        flags = np.frombuffer(self.tampered.encode("ascii"), dtype=np.uint8) == ord("1")
        return RecoveryReport(
            match_mask=~flags.reshape(side, side),
            bit_rate=self.bit_rate,
            patch_rate=self.patch_rate,
        )


class AttackSummary(BaseModel):
    attack: str
    images: int
    bit_rate: float
    patch_rate: float
    real_share: float


class CropSweepRow(BaseModel):
    size: int
    bit_rate: float
    patch_rate: float
    correctness: float
    remaining: float


class QualitySummary(BaseModel):
    images: int
    psnr: float
    ssim: float


def _check_corpus(originals: Mapping[str, np.ndarray], n: int) -> List[str]:
    if not originals:
        raise ParameterError("corpus is empty")
    for name, img in originals.items():
        image_utils.ensure_rgb(img)
        try:
            patch_utils.check_image_order(img, n)
        except ParameterError as e:
            raise ParameterError(f"{name}: {e}") from e
    return sorted(originals)


def _map_ordered(fn: Callable[[str], T], names: Sequence[str], workers: Optional[int]) -> List[T]:
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, names))


def run_attack(
    watermarked: np.ndarray,
    expected: watermark.WatermarkMatrix,
    spec: AttackSpec,
    cfg: EmbedConfig,
) -> RecoveryReport:
    attacked = attacks.apply(watermarked, spec)
    recovered = embedder.extract(attacked, expected.n, cfg)
    return detection.compare(expected, recovered)


def evaluate_corpus(
    originals: Mapping[str, np.ndarray],
    key: WatermarkKey,
    attack_list: Sequence[AttackSpec],
    cfg: Optional[EmbedConfig] = None,
    tau: float = DEFAULT_TAU,
    workers: Optional[int] = None,
) -> List[EvaluationRow]:
    """Embed every image, run every attack on it, verify; one row per (image, attack)."""
    cfg = cfg or EmbedConfig()
    if not attack_list:
        raise ParameterError("no attacks to evaluate")
    names = _check_corpus(originals, key.n)
    expected = watermark.generate(key)
    planes = watermark.to_channelwise(expected)

    def evaluate_image(name: str) -> List[EvaluationRow]:
        marked = embedder.embed(originals[name], planes, cfg)
        rows = []
        for spec in attack_list:
            report = run_attack(marked, expected, spec, cfg)
            verdict = detection.decide(report, tau)
            rows.append(
                EvaluationRow(
                    image=name,
                    attack=spec.label(),
                    params=spec.params(),
                    bit_rate=report.bit_rate,
                    patch_rate=report.patch_rate,
                    verdict=verdict.label,
                    tampered=detection.localization_map(report).to_bitstring(),
                )
            )
        logger.debug(f"Evaluated {name} under {len(attack_list)} attacks")
        return rows

    per_image = _map_ordered(evaluate_image, names, workers)
    rows = [row for image_rows in per_image for row in image_rows]
    logger.info(f"Evaluated {len(names)} images x {len(attack_list)} attacks")
    return rows


def summarize(rows: Sequence[EvaluationRow]) -> List[AttackSummary]:
    """Per-attack means, attacks in order of first appearance."""
    groups: Dict[str, List[EvaluationRow]] = {}
    for row in rows:
        groups.setdefault(row.attack, []).append(row)

    return [
        AttackSummary(
            attack=attack,
            images=len(group),
            bit_rate=float(np.mean([r.bit_rate for r in group])),
            patch_rate=float(np.mean([r.patch_rate for r in group])),
            real_share=float(np.mean([r.verdict is Label.REAL for r in group])),
        )
        for attack, group in groups.items()
    ]


def format_summary(summaries: Sequence[AttackSummary]) -> str:
    lines = [f"{'attack':<16}{'images':>8}{'bit-wise':>12}{'patch-wise':>12}{'real':>8}"]
    for s in summaries:
        lines.append(
            f"{s.attack:<16}{s.images:>8}{s.bit_rate * 100:>11.2f}%{s.patch_rate * 100:>11.2f}%"
            f"{s.real_share * 100:>7.1f}%"
        )
    return "\n".join(lines)


def write_csv(rows: Sequence[EvaluationRow], path: str) -> None:
    try:
        parent = os.path.dirname(path)
        if parent:
            os.makedirs(parent, exist_ok=True)
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.DictWriter(f, fieldnames=CSV_COLUMNS)
            writer.writeheader()
            for row in rows:
                writer.writerow(row.to_csv())
    except OSError as e:
        raise FileAccessError(f"cannot write report {path}: {e}") from e
    logger.info(f"Wrote {len(rows)} rows to {path}")


def read_csv(path: str) -> List[EvaluationRow]:
    try:
        with open(path, "r", newline="", encoding="utf-8") as f:
            records = list(csv.DictReader(f))
    except OSError as e:
        raise FileAccessError(f"cannot read report {path}: {e}") from e
    try:
        return [EvaluationRow(**record) for record in records]
    except (ValidationError, TypeError) as e:
        raise ParameterError(f"malformed report {path}: {e}") from e


def crop_sweep(
    originals: Mapping[str, np.ndarray],
    key: WatermarkKey,
    sizes: Sequence[int] = CROP_SIZES,
    cfg: Optional[EmbedConfig] = None,
    seed: int = 0,
    workers: Optional[int] = None,
) -> List[CropSweepRow]:
    """
    Black out a size x size patch block at a seeded random position of every
    image and report corpus means per size, next to the remaining portion.
    """
    cfg = cfg or EmbedConfig()
    names = _check_corpus(originals, key.n)
    grid = 1 << key.n
    if not sizes or any(not 1 <= s <= grid for s in sizes):
        raise ParameterError(f"crop sizes must lie in [1, {grid}], got {list(sizes)}")

    # positions are drawn up front so they do not depend on thread scheduling
    rng = np.random.default_rng(seed)
    positions = {
        name: [tuple(int(v) for v in rng.integers(0, grid - s + 1, size=2)) for s in sizes] for name in names
    }
    expected = watermark.generate(key)
    planes = watermark.to_channelwise(expected)

    def sweep_image(name: str) -> List[tuple]:
        marked = embedder.embed(originals[name], planes, cfg)
        results = []
        for s, (px, py) in zip(sizes, positions[name]):
            spec = attacks.crop_spec(px, py, s)
            report = run_attack(marked, expected, spec, cfg)
            correctness = detection.cropping_correctness(report, attacks.tampered_patches(spec))
            results.append((report.bit_rate, report.patch_rate, correctness))
        return results

    per_image = np.array(_map_ordered(sweep_image, names, workers))  # (images, sizes, 3)
    means = per_image.mean(axis=0)
    logger.info(f"Crop sweep over {len(names)} images, sizes {list(sizes)}")
    return [
        CropSweepRow(
            size=s,
            bit_rate=float(means[i, 0]),
            patch_rate=float(means[i, 1]),
            correctness=float(means[i, 2]),
            remaining=1.0 - (s * s) / (grid * grid),
        )
        for i, s in enumerate(sizes)
    ]


def format_crop_sweep(rows: Sequence[CropSweepRow]) -> str:
    lines = [f"{'crop':<8}{'bit-wise':>12}{'patch-wise':>12}{'correct':>12}{'remaining':>12}"]
    for r in rows:
        lines.append(
            f"{f'{r.size}x{r.size}':<8}{r.bit_rate * 100:>11.2f}%{r.patch_rate * 100:>11.2f}%"
            f"{r.correctness * 100:>11.2f}%{r.remaining * 100:>11.2f}%"
        )
    return "\n".join(lines)


def visual_quality(
    originals: Mapping[str, np.ndarray],
    key: WatermarkKey,
    cfg: Optional[EmbedConfig] = None,
    workers: Optional[int] = None,
) -> QualitySummary:
    """Corpus-mean PSNR / SSIM of watermarked against original images."""
    cfg = cfg or EmbedConfig()
    names = _check_corpus(originals, key.n)
    planes = watermark.to_channelwise(watermark.generate(key))

    def measure(name: str) -> tuple:
        marked = embedder.embed(originals[name], planes, cfg)
        return embedder.psnr(originals[name], marked), embedder.ssim(originals[name], marked)

    scores = _map_ordered(measure, names, workers)
    finite = [p for p, _ in scores if math.isfinite(p)]
    return QualitySummary(
        images=len(names),
        psnr=float(np.mean(finite)) if finite else math.inf,
        ssim=float(np.mean([s for _, s in scores])),
    )


def heatmap_image(reports: Sequence[RecoveryReport], reference: Optional[np.ndarray] = None) -> np.ndarray:
    """Cumulative localization grid in the hot colormap, optionally over a reference image."""
    grid = detection.cumulative_heatmap(reports)
    colored = plot_utils.colorize_grid(grid)
    if reference is None:
        return colored
    return plot_utils.blend(reference, colored)
