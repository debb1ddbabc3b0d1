"""
Space-filling curve traversals and their shape variations.

Coordinates are (x, y) = (column, row) on a 2^n x 2^n grid. The base Hilbert
curve is the "U-shape" whose order-1 seed is (0,0) -> (0,1) -> (1,1) -> (1,0);
every variant is derived from that base by rotation, then mirroring, then
order modification.
"""
from dataclasses import dataclass
from enum import Enum
from typing import List, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from app.config import MAX_ORDER, MIN_ORDER
from app.utils.exceptions import ParameterError
from app.utils.logger import get_logger

logger = get_logger(__name__)

Coordinates = Tuple[int, int]

ROTATIONS = {0: "0°", 1: "90°", 2: "180°", 3: "270°"}
MIRRORS = {
    0: "None",
    1: "Top",
    2: "Bottom",
    3: "Left",
    4: "Right",
    5: "Top Left",
    6: "Top Right",
    7: "Bottom Left",
    8: "Bottom Right",
}
ORDER_MODIFICATIONS = {0: "None", 1: "Reverse", 2: "Zigzag", 3: "Cross Flip"}


class CurveKind(str, Enum):
    HILBERT = "hilbert"
    ZORDER = "zorder"


class VariationParams(BaseModel):
    """Rotation / mirroring / order-modification codes (r, m, o)."""

    model_config = ConfigDict(frozen=True)

    r: int = Field(default=0, ge=0, le=3)
    m: int = Field(default=0, ge=0, le=8)
    o: int = Field(default=0, ge=0, le=3)

    def describe(self) -> str:
        return f"{ROTATIONS[self.r]}/{MIRRORS[self.m]}/{ORDER_MODIFICATIONS[self.o]}"


@dataclass(frozen=True, eq=False)
class CurveTraversal:
    kind: CurveKind
    n: int
    coords: np.ndarray  # shape (4**n, 2), columns (x, y)

    @property
    def side(self) -> int:
        return 1 << self.n

    @property
    def start(self) -> Coordinates:
        return tuple(int(v) for v in self.coords[0])

    @property
    def end(self) -> Coordinates:
        return tuple(int(v) for v in self.coords[-1])

    def __len__(self) -> int:
        return len(self.coords)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CurveTraversal):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.coords, other.coords)

    def __hash__(self) -> int:
        return hash((self.n, self.coords.tobytes()))

    def to_text(self) -> str:
        """Canonical form: one "x,y" pair per line."""
        return "".join(f"{x},{y}\n" for x, y in self.coords.tolist())


def check_order(n: int) -> None:
    if not isinstance(n, (int, np.integer)) or not MIN_ORDER <= n <= MAX_ORDER:
        raise ParameterError(f"curve order must be an integer in [{MIN_ORDER}, {MAX_ORDER}], got {n!r}")


def is_bijection(t: CurveTraversal) -> bool:
    side = t.side
    if len(t.coords) != side * side:
        return False
    if t.coords.min() < 0 or t.coords.max() >= side:
        return False
    cells = t.coords[:, 1] * side + t.coords[:, 0]
    return len(np.unique(cells)) == side * side


def hilbert_traversal(n: int) -> CurveTraversal:
    check_order(n)
    side = 1 << n
    t = np.arange(side * side, dtype=np.int64)
    x = np.zeros_like(t)
    y = np.zeros_like(t)

    # classic index -> (x, y) walk, vectorized over every index at once
    s = 1
    while s < side:
        rx = 1 & (t // 2)
        ry = 1 & (t ^ rx)
        flip = (ry == 0) & (rx == 1)
        x = np.where(flip, s - 1 - x, x)
        y = np.where(flip, s - 1 - y, y)
        swap = ry == 0
        x, y = np.where(swap, y, x), np.where(swap, x, y)
        x = x + s * rx
        y = y + s * ry
        t = t // 4
        s *= 2

    return CurveTraversal(CurveKind.HILBERT, n, np.stack([x, y], axis=1))


def _compact1by1(v: np.ndarray) -> np.ndarray:
    v = v & 0x55555555
    v = (v ^ (v >> 1)) & 0x33333333
    v = (v ^ (v >> 2)) & 0x0F0F0F0F
    v = (v ^ (v >> 4)) & 0x00FF00FF
    v = (v ^ (v >> 8)) & 0x0000FFFF
    return v


def zorder_traversal(n: int) -> CurveTraversal:
    """Morton order: x from the even index bits, y from the odd ones."""
    check_order(n)
    index = np.arange(1 << (2 * n), dtype=np.int64)
    x = _compact1by1(index)
    y = _compact1by1(index >> 1)
    return CurveTraversal(CurveKind.ZORDER, n, np.stack([x, y], axis=1))


def base_traversal(kind: CurveKind, n: int) -> CurveTraversal:
    kind = CurveKind(kind)
    if kind is CurveKind.HILBERT:
        return hilbert_traversal(n)
    return zorder_traversal(n)


def _rotate(coords: np.ndarray, r: int, side: int) -> np.ndarray:
    x, y = coords[:, 0], coords[:, 1]
    for _ in range(r):
        # 90° clockwise in image coordinates
        x, y = side - 1 - y, x
    return np.stack([x, y], axis=1)


def _mirror(coords: np.ndarray, m: int, side: int) -> np.ndarray:
    if m == 0:
        return coords.copy()
    h = side // 2
    x, y = coords[:, 0].copy(), coords[:, 1].copy()

    if m in (1, 2):
        # half-band flip across the band's own midline
        lo = 0 if m == 1 else h
        sel = (y >= lo) & (y < lo + h)
        y[sel] = 2 * lo + h - 1 - y[sel]
    elif m in (3, 4):
        lo = 0 if m == 3 else h
        sel = (x >= lo) & (x < lo + h)
        x[sel] = 2 * lo + h - 1 - x[sel]
    else:
        ox, oy = {5: (0, 0), 6: (h, 0), 7: (0, h), 8: (h, h)}[m]
        sel = (x >= ox) & (x < ox + h) & (y >= oy) & (y < oy + h)
        x[sel] = 2 * ox + h - 1 - x[sel]
        y[sel] = 2 * oy + h - 1 - y[sel]

    return np.stack([x, y], axis=1)


def _modify_order(coords: np.ndarray, o: int, side: int) -> np.ndarray:
    if o == 0:
        return coords.copy()
    if o == 1:
        return coords[::-1].copy()
    if o == 2:
        runs = coords.reshape(side, side, 2).copy()
        runs[1::2] = runs[1::2, ::-1].copy()
        return runs.reshape(-1, 2)
    # cross flip: swap halves, then quarters inside each half
    quarters = np.split(coords, 4)
    return np.concatenate([quarters[3], quarters[2], quarters[1], quarters[0]])


def check_variation(kind: CurveKind, v: VariationParams) -> None:
    if CurveKind(kind) is CurveKind.ZORDER and v.o != 0:
        raise ParameterError("Z-order curves take rotations and mirrors only (o must be 0)")


def apply_variation(t: CurveTraversal, v: VariationParams) -> CurveTraversal:
    """Rotation, then mirroring, then order modification."""
    check_variation(t.kind, v)
    side = t.side
    coords = _rotate(t.coords, v.r, side)
    coords = _mirror(coords, v.m, side)
    coords = _modify_order(coords, v.o, side)
    return CurveTraversal(t.kind, t.n, coords)


def build_variant(kind: CurveKind, n: int, v: VariationParams) -> CurveTraversal:
    return apply_variation(base_traversal(kind, n), v)


def enumerate_variants(kind: CurveKind, n: int) -> List[Tuple[VariationParams, CurveTraversal]]:
    kind = CurveKind(kind)
    check_order(n)
    if n < 2:
        raise ParameterError("variant enumeration needs n >= 2; half-grid mirrors collapse on a 2x2 grid")

    base = base_traversal(kind, n)
    orders = range(4) if kind is CurveKind.HILBERT else range(1)
    variants = []
    for r in range(4):
        for m in range(9):
            for o in orders:
                v = VariationParams(r=r, m=m, o=o)
                variants.append((v, apply_variation(base, v)))

    logger.info(f"Enumerated {len(variants)} {kind.value} variants at order {n}")
    return variants
