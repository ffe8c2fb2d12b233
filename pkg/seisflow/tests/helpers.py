"""
Helpers shared by the test suite: small models, geometries and worlds.
"""
from typing import List, Optional, Tuple

import numpy as np

from seisflow.core.wavekit.grid import AcquisitionGeometry, VelocityModel, two_layer_model

F64 = "float64"


def constant_model(
    n: int = 101, velocity: float = 2000.0, spacing: float = 10.0, absorbing_width: int = 20
) -> VelocityModel:
    """Square constant-velocity model."""
    return VelocityModel.from_velocity(
        np.full((n, n), velocity), (spacing, spacing), absorbing_width=absorbing_width
    )


def layered_model(
    shape: Tuple[int, int] = (61, 61),
    velocities: Tuple[float, float] = (2000.0, 2500.0),
    spacing: float = 10.0,
    absorbing_width: int = 10,
) -> VelocityModel:
    """Two-layer model with the interface at mid depth."""
    depth = (shape[0] // 2) * spacing
    return two_layer_model(shape, (spacing, spacing), velocities[0], velocities[1], depth, absorbing_width)


def surface_geometry(
    model: VelocityModel,
    source_x: Optional[float] = None,
    depth: float = 20.0,
    receiver_step: int = 5,
    record_time: float = 0.3,
    f0: float = 15.0,
) -> AcquisitionGeometry:
    """Source and a line of receivers just below the top of the model."""
    width = model.extent[1]
    if source_x is None:
        source_x = width / 2.0
    xs: List[float] = list(np.arange(0, model.shape[1], receiver_step) * model.spacing[1])
    return AcquisitionGeometry(
        (depth, source_x), [(depth, x) for x in xs], record_time, f0
    )


def tiny_problem_dict(**inversion) -> dict:
    """A few-second LS-RTM problem: 41 x 61 two-layer model, four shots."""
    settings = {"n_iterations": 3, "batch_size": 2, "step_size": "auto", "seed": 3}
    settings.update(inversion)
    return {
        "model": {
            "shape": [41, 61],
            "spacing": 10.0,
            "velocities": [1500.0, 2000.0],
            "interface_depth": 200.0,
            "absorbing_width": 10,
        },
        "survey": {
            "n_shots": 4,
            "half_offset": 300.0,
            "receiver_step": 2,
            "depth": 20.0,
            "record_time": 0.4,
            "f0": 15.0,
        },
        "imaging": {"save_mode": "full", "mute_depth": 40.0, "spatial_order": 4},
        "inversion": settings,
    }
