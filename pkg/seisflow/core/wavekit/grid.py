"""
Grid, acquisition and record types for the 2D acoustic propagator.

The model is parametrized by squared slowness m = 1/v^2 (s^2/m^2), which
keeps the wave operator linear in m.
"""
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from seisflow.core.constants import DEFAULT_ABSORBING_WIDTH
from seisflow.core.errors import ArgumentError
from seisflow.core.wavekit.wavelet import num_timesteps

Position = Tuple[float, float]


@dataclass
class VelocityModel:
    """
    2D grid of squared slowness.

    Attributes:
        slowness_sq: (nz, nx) array in s^2/m^2
        spacing: (dz, dx) in meters
        origin: (z, x) of grid point (0, 0) in meters
        absorbing_width: damping layer width in cells, added around the grid
    """

    slowness_sq: np.ndarray
    spacing: Tuple[float, float]
    origin: Tuple[float, float] = (0.0, 0.0)
    absorbing_width: int = DEFAULT_ABSORBING_WIDTH

    def __post_init__(self):
        self.slowness_sq = np.asarray(self.slowness_sq)
        if self.slowness_sq.ndim != 2:
            raise ArgumentError("slowness_sq must be a 2D array")
        if not np.issubdtype(self.slowness_sq.dtype, np.floating):
            self.slowness_sq = self.slowness_sq.astype(np.float64)
        self.spacing = (float(self.spacing[0]), float(self.spacing[1]))
        self.origin = (float(self.origin[0]), float(self.origin[1]))
        if min(self.spacing) <= 0:
            raise ArgumentError(f"spacing must be positive, got {self.spacing}")
        if not np.all(np.isfinite(self.slowness_sq)) or np.any(self.slowness_sq <= 0):
            raise ArgumentError("slowness_sq must be finite and strictly positive")
        if self.absorbing_width < 0:
            raise ArgumentError("absorbing_width must be non-negative")

    @classmethod
    def from_velocity(
        cls,
        velocity: np.ndarray,
        spacing: Tuple[float, float],
        origin: Tuple[float, float] = (0.0, 0.0),
        absorbing_width: int = DEFAULT_ABSORBING_WIDTH,
    ) -> "VelocityModel":
        """Build a model from a velocity grid in m/s."""
        velocity = np.asarray(velocity, dtype=np.float64)
        if np.any(velocity <= 0):
            raise ArgumentError("velocity must be strictly positive")
        return cls(1.0 / velocity**2, spacing, origin, absorbing_width)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.slowness_sq.shape  # type: ignore[return-value]

    @property
    def velocity(self) -> np.ndarray:
        return 1.0 / np.sqrt(self.slowness_sq)

    @property
    def v_max(self) -> float:
        return float(1.0 / np.sqrt(self.slowness_sq.min()))

    @property
    def extent(self) -> Tuple[float, float]:
        """Physical (depth, width) covered by the grid in meters."""
        nz, nx = self.shape
        return ((nz - 1) * self.spacing[0], (nx - 1) * self.spacing[1])

    def contains(self, position: Position) -> bool:
        """Whether a (z, x) position lies inside the physical domain."""
        depth, width = self.extent
        z = position[0] - self.origin[0]
        x = position[1] - self.origin[1]
        return 0.0 <= z <= depth and 0.0 <= x <= width

    def with_slowness(self, slowness_sq: np.ndarray) -> "VelocityModel":
        """Copy of this model with a different squared-slowness grid."""
        return VelocityModel(
            np.asarray(slowness_sq).reshape(self.shape),
            self.spacing,
            self.origin,
            self.absorbing_width,
        )


def two_layer_model(
    shape: Tuple[int, int],
    spacing: Tuple[float, float],
    v_top: float,
    v_bottom: float,
    interface_depth: float,
    absorbing_width: int = DEFAULT_ABSORBING_WIDTH,
) -> VelocityModel:
    """
    Flat two-layer model with a single horizontal interface.

    Args:
        shape: (nz, nx)
        spacing: (dz, dx) in meters
        v_top: Velocity above the interface in m/s
        v_bottom: Velocity below the interface in m/s
        interface_depth: Interface depth in meters

    Returns:
        VelocityModel
    """
    velocity = np.full(shape, float(v_top))
    depths = np.arange(shape[0]) * spacing[0]
    velocity[depths >= interface_depth, :] = float(v_bottom)
    return VelocityModel.from_velocity(velocity, spacing, absorbing_width=absorbing_width)


@dataclass
class AcquisitionGeometry:
    """One source experiment: source, receivers, recording length and wavelet frequency."""

    source_pos: Position
    receiver_pos: List[Position]
    record_time: float
    f0: float

    def __post_init__(self):
        self.source_pos = (float(self.source_pos[0]), float(self.source_pos[1]))
        self.receiver_pos = [(float(z), float(x)) for z, x in self.receiver_pos]
        if self.record_time <= 0:
            raise ArgumentError("record_time must be positive")
        if self.f0 <= 0:
            raise ArgumentError("f0 must be positive")
        if not self.receiver_pos:
            raise ArgumentError("at least one receiver is required")

    @property
    def n_receivers(self) -> int:
        return len(self.receiver_pos)

    def validate_inside(self, model: VelocityModel) -> None:
        """Raise ArgumentError if the source or a receiver is outside the model."""
        if not model.contains(self.source_pos):
            raise ArgumentError(f"source {self.source_pos} lies outside the model")
        outside = [p for p in self.receiver_pos if not model.contains(p)]
        if outside:
            raise ArgumentError(f"{len(outside)} receivers lie outside the model, first {outside[0]}")

    def subset(self, indices: Sequence[int]) -> "AcquisitionGeometry":
        """Geometry restricted to the given receiver indices."""
        return AcquisitionGeometry(
            self.source_pos,
            [self.receiver_pos[i] for i in indices],
            self.record_time,
            self.f0,
        )


@dataclass
class ShotRecord:
    """Receiver traces (time x receiver) of one source experiment."""

    geometry: AcquisitionGeometry
    dt: float
    data: np.ndarray

    def __post_init__(self):
        self.data = np.asarray(self.data)
        if self.dt <= 0:
            raise ArgumentError("dt must be positive")
        expected = (num_timesteps(self.geometry.record_time, self.dt), self.geometry.n_receivers)
        if self.data.shape != expected:
            raise ArgumentError(f"record shape {self.data.shape} does not match geometry {expected}")

    @property
    def nt(self) -> int:
        return self.data.shape[0]

    def with_data(self, data: np.ndarray) -> "ShotRecord":
        return ShotRecord(self.geometry, self.dt, data)


@dataclass(frozen=True)
class SaveMode:
    """
    Forward wavefield storage policy.

    ``full`` keeps every time step, ``interval`` keeps a checkpoint every k
    steps and recomputes segments during the reverse sweep, ``none`` keeps
    nothing (misfit-only modeling).
    """

    kind: str = "full"
    interval: int = 1

    def __post_init__(self):
        if self.kind not in ("full", "interval", "none"):
            raise ArgumentError(f"unknown save mode {self.kind!r}")
        if self.kind == "interval" and self.interval < 1:
            raise ArgumentError("checkpoint interval must be >= 1")

    @classmethod
    def full(cls) -> "SaveMode":
        return cls("full", 1)

    @classmethod
    def every(cls, k: int) -> "SaveMode":
        return cls("interval", int(k))

    @classmethod
    def none(cls) -> "SaveMode":
        return cls("none", 0)

    @classmethod
    def parse(cls, text: Optional[str]) -> "SaveMode":
        """Parse ``"full"``, ``"none"`` or ``"interval:k"``."""
        if text is None or text == "full":
            return cls.full()
        if text == "none":
            return cls.none()
        if text.startswith("interval:"):
            try:
                return cls.every(int(text.split(":", 1)[1]))
            except ValueError as e:
                raise ArgumentError(f"invalid save mode {text!r}") from e
        raise ArgumentError(f"invalid save mode {text!r}")

    def __str__(self) -> str:
        return f"interval:{self.interval}" if self.kind == "interval" else self.kind


@dataclass
class Stored:
    """Snapshots kept by a forward run (interior of the padded grid)."""

    snapshots: List[np.ndarray] = field(default_factory=list)
    # (step, u^step, u^(step-1)) pairs for interval mode
    checkpoints: List[Tuple[int, np.ndarray, np.ndarray]] = field(default_factory=list)
