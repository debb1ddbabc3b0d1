"""
Fractal watermark matrices: raw curve encoding, keystream encryption and the
channel-wise bit-plane layout.

Matrices are indexed [y, x]. Plane order is MSB-first: plane 0 holds bit 3,
plane 3 holds bit 0. Watermarks are never written to disk; the key is the
only thing that is stored.
"""
from dataclasses import dataclass

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.config import ENTRY_BITS, ENTRY_LEVELS, MAX_ORDER, MIN_ORDER
from app.services import chaotic_keystream, fractal_curves
from app.services.chaotic_keystream import ChaosParams, DigitKeystream
from app.services.fractal_curves import CurveKind, CurveTraversal, VariationParams
from app.utils.exceptions import ParameterError
from app.utils.logger import get_logger

logger = get_logger(__name__)

# bit weights per plane, MSB-first
PLANE_WEIGHTS = np.array([1 << (ENTRY_BITS - 1 - b) for b in range(ENTRY_BITS)], dtype=np.uint8)


class WatermarkKey(BaseModel):
    """Everything a watermark regenerates from."""

    model_config = ConfigDict(frozen=True)

    kind: CurveKind = CurveKind.HILBERT
    n: int = Field(default=3, ge=MIN_ORDER, le=MAX_ORDER)
    variation: VariationParams = VariationParams()
    chaos: ChaosParams

    @model_validator(mode="after")
    def _check_variation(self):
        if self.kind is CurveKind.ZORDER and self.variation.o != 0:
            raise ValueError("Z-order keys cannot carry an order modification (o must be 0)")
        return self


@dataclass(frozen=True, eq=False)
class WatermarkMatrix:
    n: int
    entries: np.ndarray  # (2^n, 2^n) uint8 in [0, 15]

    def __post_init__(self):
        side = 1 << self.n
        if self.entries.shape != (side, side):
            raise ParameterError(f"watermark of order {self.n} must be {side}x{side}, got {self.entries.shape}")
        if self.entries.size and (self.entries.min() < 0 or self.entries.max() >= ENTRY_LEVELS):
            raise ParameterError("watermark entries must lie in [0, 15]")

    @property
    def side(self) -> int:
        return 1 << self.n

    @property
    def num_bits(self) -> int:
        return ENTRY_BITS * self.entries.size

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, WatermarkMatrix):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.entries, other.entries)

    def dump_text(self) -> str:
        """Row-per-line hex dump, used for comparisons in tests."""
        return "".join("".join(f"{v:x}" for v in row) + "\n" for row in self.entries.tolist())


@dataclass(frozen=True, eq=False)
class ChannelwiseWatermark:
    planes: np.ndarray  # (4, 2^n, 2^n) uint8 in {0, 1}

    @property
    def n(self) -> int:
        return int(self.planes.shape[-1]).bit_length() - 1


def raw_matrix(t: CurveTraversal) -> WatermarkMatrix:
    """Entry at coords[i] is i mod 16: the curve's order and direction."""
    side = t.side
    entries = np.zeros((side, side), dtype=np.uint8)
    ranks = np.arange(len(t.coords)) % ENTRY_LEVELS
    entries[t.coords[:, 1], t.coords[:, 0]] = ranks
    return WatermarkMatrix(t.n, entries)


def encrypt(raw: WatermarkMatrix, t: CurveTraversal, ks: DigitKeystream) -> WatermarkMatrix:
    """Entry at coords[i] becomes (raw + digit_i) mod 16."""
    if len(ks) != len(t.coords):
        raise ParameterError(f"keystream holds {len(ks)} digits, curve has {len(t.coords)} cells")
    if raw.n != t.n:
        raise ParameterError(f"matrix order {raw.n} does not match curve order {t.n}")

    xs, ys = t.coords[:, 0], t.coords[:, 1]
    entries = raw.entries.copy()
    encrypted = (raw.entries[ys, xs].astype(np.int64) + ks.as_array()) % ENTRY_LEVELS
    entries[ys, xs] = encrypted.astype(np.uint8)
    return WatermarkMatrix(raw.n, entries)


def generate(key: WatermarkKey) -> WatermarkMatrix:
    traversal = fractal_curves.build_variant(key.kind, key.n, key.variation)
    raw = raw_matrix(traversal)
    ks = chaotic_keystream.keystream(key.chaos, count=len(traversal))
    matrix = encrypt(raw, traversal, ks)
    logger.info(
        f"Generated {key.kind.value} watermark n={key.n} ({matrix.num_bits} bits), "
        f"variation {key.variation.describe()}"
    )
    return matrix


def to_channelwise(m: WatermarkMatrix) -> ChannelwiseWatermark:
    shifts = np.arange(ENTRY_BITS - 1, -1, -1, dtype=np.uint8)
    planes = (m.entries[None, :, :] >> shifts[:, None, None]) & 1
    return ChannelwiseWatermark(planes.astype(np.uint8))


def from_channelwise(c: ChannelwiseWatermark) -> WatermarkMatrix:
    if c.planes.ndim != 3 or c.planes.shape[0] != ENTRY_BITS:
        raise ParameterError(f"expected {ENTRY_BITS} bit planes, got shape {c.planes.shape}")
    entries = np.tensordot(PLANE_WEIGHTS, c.planes.astype(np.uint8), axes=1)
    return WatermarkMatrix(c.n, entries.astype(np.uint8))
