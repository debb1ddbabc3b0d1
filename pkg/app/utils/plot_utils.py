import os

import matplotlib

matplotlib.use("Agg")

import numpy as np
from matplotlib import colormaps
from matplotlib.figure import Figure

from app.config import PATCH_SIZE
from app.utils import image_utils
from app.utils.exceptions import FileAccessError, ParameterError

HEATMAP_CMAP = "hot"
HEATMAP_ALPHA = 0.5


def colorize_grid(grid: np.ndarray, cmap: str = HEATMAP_CMAP) -> np.ndarray:
    """[0, 1] grid -> RGB image at patch resolution."""
    if grid.ndim != 2:
        raise ParameterError(f"expected a 2-D grid, got shape {grid.shape}")
    rgba = colormaps[cmap](np.clip(grid, 0.0, 1.0))
    cells = image_utils.to_uint8(rgba[..., :3] * 255.0)
    return np.kron(cells, np.ones((PATCH_SIZE, PATCH_SIZE, 1), dtype=np.uint8))


def blend(base: np.ndarray, layer: np.ndarray, alpha: float = HEATMAP_ALPHA) -> np.ndarray:
    image_utils.ensure_rgb(base)
    if base.shape != layer.shape:
        raise ParameterError(f"cannot blend {layer.shape} over {base.shape}")
    mixed = (1.0 - alpha) * base.astype(np.float64) + alpha * layer.astype(np.float64)
    return image_utils.to_uint8(mixed)


def save_bifurcation_plot(a_values: np.ndarray, samples: np.ndarray, path: str, safe_low: float) -> None:
    """Scatter of post-transient iterates per map parameter, safe range shaded."""
    fig = Figure(figsize=(8, 5), dpi=120)
    ax = fig.add_subplot(1, 1, 1)
    xs = np.repeat(a_values, samples.shape[1])
    ax.plot(xs, samples.ravel(), ",", color="black", alpha=0.4)
    ax.axvspan(safe_low, a_values.max(), color="tab:green", alpha=0.15, label=f"key range a >= {safe_low:g}")
    ax.set_xlabel("a")
    ax.set_ylabel("x")
    ax.set_xlim(a_values.min(), a_values.max())
    ax.set_ylim(0.0, 1.0)
    ax.legend(loc="upper left")

    try:
        parent = os.path.dirname(path)
        if parent:
            os.makedirs(parent, exist_ok=True)
        fig.savefig(path)
    except OSError as e:
        raise FileAccessError(f"cannot write plot {path}: {e}") from e
