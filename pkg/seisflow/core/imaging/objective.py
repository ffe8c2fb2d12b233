"""
Least-squares imaging objective and its per-shot gradient.

For one shot the objective is 0.5 ||F(m, q) - d||^2 summed over every
receiver sample. Each shot is modeled on a source-centered window of the
model and its gradient is embedded back into the full grid.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from seisflow.core.errors import ArgumentError
from seisflow.core.wavekit.grid import SaveMode, ShotRecord, VelocityModel
from seisflow.core.wavekit.propagator import PropagatorSettings, adjoint_gradient, forward
from seisflow.core.wavekit.wavelet import num_timesteps, ricker
from seisflow.core.wavekit.windowing import extend_gradient, window_model

# Configure logging
logger = logging.getLogger(__name__)


@dataclass
class ImagingOptions:
    """
    How shots are modeled.

    Attributes:
        aperture: Width in meters of the source-centered window (None models
            the whole grid)
        save_mode: Forward wavefield storage for gradients
        mute_depth: Gradient rows shallower than this depth (m) are zeroed
        settings: Propagator settings
    """

    aperture: Optional[float] = None
    save_mode: SaveMode = field(default_factory=SaveMode.full)
    mute_depth: float = 0.0
    settings: PropagatorSettings = field(default_factory=PropagatorSettings)

    def __post_init__(self):
        if self.aperture is not None and self.aperture <= 0:
            raise ArgumentError("aperture must be positive")
        if self.mute_depth < 0:
            raise ArgumentError("mute_depth must be non-negative")
        if self.save_mode.kind == "none":
            raise ArgumentError("gradients need a save mode other than none")


def _window(
    model: VelocityModel, shot: ShotRecord, options: ImagingOptions
) -> Tuple[VelocityModel, Tuple[int, int]]:
    if options.aperture is None:
        return model, (0, 0)
    return window_model(model, shot.geometry.source_pos, options.aperture)


def model_shot(
    model: VelocityModel,
    shot: ShotRecord,
    options: Optional[ImagingOptions] = None,
    save_mode: Optional[SaveMode] = None,
):
    """
    Forward model the geometry of ``shot`` at its sampling.

    Returns:
        (modeled record, wavefield handle, window offset)
    """
    options = options or ImagingOptions()
    geometry = shot.geometry
    sub, offset = _window(model, shot, options)
    nt = num_timesteps(geometry.record_time, shot.dt)
    wavelet = ricker(geometry.f0, shot.dt, nt)
    record, handle = forward(
        sub,
        geometry,
        wavelet,
        save_mode if save_mode is not None else options.save_mode,
        dt=shot.dt,
        settings=options.settings,
    )
    return record, handle, offset


def synthesize_shot(
    model: VelocityModel,
    shot_template: ShotRecord,
    options: Optional[ImagingOptions] = None,
) -> ShotRecord:
    """Observed data for a shot, generated with the modeling kernel itself."""
    record, handle, _ = model_shot(model, shot_template, options, SaveMode.none())
    handle.context.close()
    return record


def _misfit_of(residual: np.ndarray) -> float:
    r = np.asarray(residual, dtype=np.float64)
    return 0.5 * float(np.sum(r * r))


def misfit(model: VelocityModel, shot: ShotRecord, options: Optional[ImagingOptions] = None) -> float:
    """
    0.5 ||F(m, q) - d||^2 for one shot.

    Raises:
        ArgumentError: If the shot geometry does not fit the model
        NumericalInstabilityError: If the modeling blows up
    """
    record, handle, _ = model_shot(model, shot, options, SaveMode.none())
    handle.context.close()
    return _misfit_of(record.data - shot.data)


def evaluate_shot(
    model: VelocityModel, shot: ShotRecord, options: Optional[ImagingOptions] = None
) -> Tuple[float, np.ndarray]:
    """
    Misfit and gradient of one shot.

    Args:
        model: Current model
        shot: Observed record
        options: Modeling options

    Returns:
        (misfit, gradient on the full model grid as float64)
    """
    options = options or ImagingOptions()
    record, handle, offset = model_shot(model, shot, options)
    residual = record.with_data(record.data - shot.data)
    sub_model = handle.context.model
    try:
        sub_grad = adjoint_gradient(sub_model, handle, residual)
    finally:
        handle.context.close()
    grad = extend_gradient(sub_grad, model.shape, offset)
    if options.mute_depth > 0:
        rows = int(math.ceil((options.mute_depth - model.origin[0]) / model.spacing[0] - 1e-9))
        grad[: max(rows, 0), :] = 0.0
    return _misfit_of(residual.data), grad


def shot_gradient(
    model: VelocityModel,
    shot: ShotRecord,
    save_mode: Optional[SaveMode] = None,
    options: Optional[ImagingOptions] = None,
) -> np.ndarray:
    """Gradient of the shot misfit with respect to squared slowness."""
    options = options or ImagingOptions()
    if save_mode is not None:
        options = ImagingOptions(options.aperture, save_mode, options.mute_depth, options.settings)
    return evaluate_shot(model, shot, options)[1]


def total_misfit(
    model: VelocityModel, shots: Sequence[ShotRecord], options: Optional[ImagingOptions] = None
) -> float:
    """Sum of shot misfits."""
    return float(sum(misfit(model, shot, options) for shot in shots))
