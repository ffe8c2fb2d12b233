"""
2D acoustic finite-difference propagator.

Forward modeling, the data-to-source adjoint, checkpointed adjoint-state
gradients and source-centered windowing.
"""
from seisflow.core.wavekit.grid import (
    AcquisitionGeometry,
    SaveMode,
    ShotRecord,
    VelocityModel,
    two_layer_model,
)
from seisflow.core.wavekit.propagator import (
    PropagatorSettings,
    WavefieldHandle,
    adjoint_forward,
    adjoint_gradient,
    forward,
    stable_dt,
)
from seisflow.core.wavekit.wavelet import num_timesteps, ricker
from seisflow.core.wavekit.windowing import extend_gradient, window_model

__all__ = [
    "AcquisitionGeometry",
    "PropagatorSettings",
    "SaveMode",
    "ShotRecord",
    "VelocityModel",
    "WavefieldHandle",
    "adjoint_forward",
    "adjoint_gradient",
    "extend_gradient",
    "forward",
    "num_timesteps",
    "ricker",
    "stable_dt",
    "two_layer_model",
    "window_model",
]
