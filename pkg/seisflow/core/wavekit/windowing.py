"""
Source-centered modeling windows.

Each shot is modeled on the columns within half an aperture of its source;
the resulting gradient is embedded back into the full grid.
"""
import math
from typing import Tuple

import numpy as np

from seisflow.core.errors import ArgumentError
from seisflow.core.wavekit.grid import Position, VelocityModel


def window_model(
    model: VelocityModel, source_pos: Position, aperture: float
) -> Tuple[VelocityModel, Tuple[int, int]]:
    """
    Restrict the model to the columns within aperture/2 of the source.

    Args:
        model: Full model
        source_pos: (z, x) source position in meters
        aperture: Total window width in meters

    Returns:
        (sub-model, (row offset, column offset)) in grid points
    """
    if aperture <= 0:
        raise ArgumentError("aperture must be positive")
    nz, nx = model.shape
    dx = model.spacing[1]
    if aperture >= model.extent[1]:
        return model, (0, 0)

    x = source_pos[1] - model.origin[1]
    first = max(0, int(math.ceil((x - aperture / 2.0) / dx - 1e-9)))
    last = min(nx - 1, int(math.floor((x + aperture / 2.0) / dx + 1e-9)))
    sub = VelocityModel(
        model.slowness_sq[:, first : last + 1].copy(),
        model.spacing,
        (model.origin[0], model.origin[1] + first * dx),
        model.absorbing_width,
    )
    return sub, (0, first)


def extend_gradient(
    sub_grad: np.ndarray, full_shape: Tuple[int, int], offset: Tuple[int, int]
) -> np.ndarray:
    """
    Embed a window gradient into a zero array of the full model shape.

    Raises:
        ArgumentError: If the window does not fit at the offset
    """
    sub_grad = np.asarray(sub_grad)
    oz, ox = offset
    if (
        oz < 0
        or ox < 0
        or oz + sub_grad.shape[0] > full_shape[0]
        or ox + sub_grad.shape[1] > full_shape[1]
    ):
        raise ArgumentError(
            f"window of shape {sub_grad.shape} at {offset} does not fit in {full_shape}"
        )
    full = np.zeros(full_shape, dtype=sub_grad.dtype)
    full[oz : oz + sub_grad.shape[0], ox : ox + sub_grad.shape[1]] = sub_grad
    return full
