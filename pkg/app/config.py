import os
from typing import Optional

from pydantic import BaseModel, Field

# --- Watermark layout ---
PATCH_SIZE = 32          # 每個 entry 對應 32x32 patch
ENTRY_BITS = 4           # 每個 entry 4 bits
ENTRY_LEVELS = 1 << ENTRY_BITS
MIN_ORDER = 1
MAX_ORDER = 8

# --- Embedding backend ---
DEFAULT_DELTA = 40.0
# (row, column) frequency indices inside the 32x32 patch DCT
DEFAULT_COEFF_SLOTS = ((1, 2), (2, 1), (2, 2), (3, 1))
REFINE_ROUNDS = 4

# --- Detection ---
DEFAULT_TAU = 0.85

# --- Attack defaults ---
DEFAULT_JPEG_QUALITY = 80
DEFAULT_NOISE_SIGMA = 5 / 255
DEFAULT_BLUR_KERNEL = 3
DEFAULT_BLUR_SIGMA = 1.0
DEFAULT_MEDIAN_KERNEL = 3
DEFAULT_RESIZE_SCALE = 0.5
# blur sigma of the whole-frame fake proxy; must keep patch-wise recovery below DEFAULT_TAU
DEFAULT_PERTURB_STRENGTH = 2.0

# --- Key file ---
KEY_SCHEMA_VERSION = 1

KEY_ENV = "FRACTAL_WM_KEY"
WORKERS_ENV = "FRACTAL_WM_WORKERS"


class Settings(BaseModel):
    """Runtime settings read from the environment; CLI flags override them."""

    key_path: Optional[str] = None
    workers: int = Field(default=4, ge=1)


def get_settings() -> Settings:
    return Settings(
        key_path=os.getenv(KEY_ENV) or None,
        workers=os.getenv(WORKERS_ENV, 4),
    )
