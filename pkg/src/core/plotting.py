"""Static SVG summaries of a constructible module: dimensions over a parameter grid."""
import os

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from sympy import Rational  # noqa: E402

from core.errors import CapsExceededError, InputError  # noqa: E402
from core.persistence import ConstructibleModule  # noqa: E402
from utils.file_manager import FileManager  # noqa: E402
from utils.logger import logger  # noqa: E402

DEFAULT_BOX = (Rational(-2), Rational(2))


def grid_values(lo, hi, size: int):
    """``size`` evenly spaced exact rationals from lo to hi."""
    if size < 2:
        raise InputError("a plot grid needs at least two points per axis")
    lo, hi = Rational(lo), Rational(hi)
    return [lo + (hi - lo) * Rational(k, size - 1) for k in range(size)]


def dims_grid(module: ConstructibleModule, size: int = 21, box=DEFAULT_BOX) -> np.ndarray:
    """Array of shape (ell + 1,) + (size,) * p with dim H_i at each grid point."""
    p = module.p
    if p > 2:
        raise CapsExceededError(f"plots cover at most 2 parameters, got {p}")
    values = grid_values(box[0], box[1], size)
    out = np.zeros((module.ell + 1,) + (size,) * p, dtype=int)
    for index in np.ndindex(*(size,) * p):
        dims = module.dims_at([values[k] for k in index])
        for i, d in enumerate(dims):
            out[(i,) + index] = d
    return out


def plot_dims(module: ConstructibleModule, path, size: int = 21, box=DEFAULT_BOX) -> bool:
    """Write an SVG of dim H_i(S_{f<=y}) over the grid; byte-stable across runs."""
    grid = dims_grid(module, size, box)
    axis = np.array([float(v) for v in grid_values(box[0], box[1], size)])
    names = [str(y) for y in module.input.params]
    plt.rcParams['svg.hashsalt'] = 'sapers'
    degrees = module.ell + 1
    fig, axes = plt.subplots(1, degrees, figsize=(4 * degrees, 3.5), squeeze=False)
    for i in range(degrees):
        ax = axes[0][i]
        if module.p == 1:
            ax.step(axis, grid[i], where='post')
            ax.set_xlabel(names[0])
            ax.set_ylabel(f"dim H_{i}")
        else:
            extent = (axis[0], axis[-1], axis[0], axis[-1])
            image = ax.imshow(grid[i].T, origin='lower', extent=extent, interpolation='nearest', cmap='viridis')
            fig.colorbar(image, ax=ax)
            ax.set_xlabel(names[0])
            ax.set_ylabel(names[1])
        ax.set_title(f"H_{i} over {module.field.name}")
    fig.tight_layout()
    FileManager.ensure_directory(os.path.dirname(os.path.abspath(str(path))))
    try:
        fig.savefig(path, format='svg', metadata={'Date': None})
    except OSError as e:
        logger.error(f"Failed to write plot {path}: {e}")
        return False
    finally:
        plt.close(fig)
    logger.info(f"plot written to {path}")
    return True
