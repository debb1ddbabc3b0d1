from typing import FrozenSet, Iterable, Tuple

import numpy as np

from app.config import MAX_ORDER, MIN_ORDER, PATCH_SIZE
from app.utils.exceptions import ParameterError

PatchCoord = Tuple[int, int]  # (px, py)


def order_for_side(side: int) -> int:
    """Curve order n such that side == 32 * 2^n."""
    grid = side // PATCH_SIZE
    if side % PATCH_SIZE or grid < 1 or grid & (grid - 1):
        raise ParameterError(f"image side {side} is not 32 * 2^n")
    n = grid.bit_length() - 1
    if not MIN_ORDER <= n <= MAX_ORDER:
        raise ParameterError(f"image side {side} gives curve order {n}, outside [{MIN_ORDER}, {MAX_ORDER}]")
    return n


def check_image_order(img: np.ndarray, n: int) -> None:
    h, w = img.shape[:2]
    side = PATCH_SIZE << n
    if h != side or w != side:
        raise ParameterError(f"order {n} needs a {side}x{side} image, got {w}x{h}")


def to_patches(plane: np.ndarray) -> np.ndarray:
    """(H, W) -> (H/32, W/32, 32, 32), patch [py, px]."""
    h, w = plane.shape
    return plane.reshape(h // PATCH_SIZE, PATCH_SIZE, w // PATCH_SIZE, PATCH_SIZE).swapaxes(1, 2)


def from_patches(patches: np.ndarray) -> np.ndarray:
    gy, gx = patches.shape[:2]
    return patches.swapaxes(1, 2).reshape(gy * PATCH_SIZE, gx * PATCH_SIZE)


def patch_slice(px: int, py: int) -> Tuple[slice, slice]:
    """(rows, columns) of patch (px, py)."""
    return (
        slice(py * PATCH_SIZE, (py + 1) * PATCH_SIZE),
        slice(px * PATCH_SIZE, (px + 1) * PATCH_SIZE),
    )


def patch_rectangle(px: int, py: int, width: int, height: int) -> Tuple[int, int, int, int]:
    """Pixel rectangle (x, y, w, h) covering width x height patches from (px, py)."""
    return (px * PATCH_SIZE, py * PATCH_SIZE, width * PATCH_SIZE, height * PATCH_SIZE)


def check_patch_rectangle(rect: Tuple[int, int, int, int], side: int) -> None:
    x, y, w, h = rect
    if any(v % PATCH_SIZE for v in rect):
        raise ParameterError(f"rectangle {rect} is not aligned to the {PATCH_SIZE}-pixel patch grid")
    if w <= 0 or h <= 0 or x < 0 or y < 0 or x + w > side or y + h > side:
        raise ParameterError(f"rectangle {rect} does not fit inside a {side}x{side} image")


def rectangle_patches(rect: Tuple[int, int, int, int]) -> FrozenSet[PatchCoord]:
    x, y, w, h = rect
    return frozenset(
        (px, py)
        for py in range(y // PATCH_SIZE, (y + h) // PATCH_SIZE)
        for px in range(x // PATCH_SIZE, (x + w) // PATCH_SIZE)
    )


def patch_mask(coords: Iterable[PatchCoord], n: int) -> np.ndarray:
    """Boolean [py, px] grid with the given patches set."""
    side = 1 << n
    mask = np.zeros((side, side), dtype=bool)
    for px, py in coords:
        if not (0 <= px < side and 0 <= py < side):
            raise ParameterError(f"patch ({px}, {py}) lies outside the {side}x{side} grid")
        mask[py, px] = True
    return mask
