"""
2D acoustic finite-difference propagator with adjoint and gradient.

The discretized wave equation in squared slowness m with a damping sponge
eta (independent of m):

    m (u[n+1] - 2 u[n] + u[n-1]) - dt^2 L u[n] + eta dt/2 (u[n+1] - u[n-1]) = dt^2 q[n]

is marched as u[n+1] = D^-1 (G u[n] - B u[n-1] + dt^2 P_s q[n]) with
D = m + eta dt/2, G = 2m + dt^2 L and B = m - eta dt/2. The model is padded
with ``absorbing_width`` edge-replicated cells carrying the sponge. Because
D and B are diagonal and L is symmetric, the exact discrete adjoint runs the
same recursion backwards in time, which is what ``adjoint_forward`` and
``adjoint_gradient`` do. The gradient of 0.5 ||P_r u - d||^2 with respect to
m is -sum_k v[k] * (u[k] - 2 u[k-1] + u[k-2]), folded back through the edge
padding.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np

from seisflow.core.constants import (
    DEFAULT_SPATIAL_ORDER,
    INSTABILITY_CHECK_INTERVAL,
    PRECISION,
    SPONGE_REFERENCE_VELOCITY,
    THREADS,
)
from seisflow.core.errors import ArgumentError, NumericalInstabilityError
from seisflow.core.wavekit.grid import (
    AcquisitionGeometry,
    Position,
    SaveMode,
    ShotRecord,
    Stored,
    VelocityModel,
)
from seisflow.core.wavekit.stencil import Laplacian, cfl_coefficient
from seisflow.core.wavekit.wavelet import num_timesteps

# Configure logging
logger = logging.getLogger(__name__)

# Target amplitude reflection of the sponge
SPONGE_REFLECTION = 1e-3


@dataclass
class PropagatorSettings:
    """Numerical settings shared by every propagation context."""

    spatial_order: int = DEFAULT_SPATIAL_ORDER
    precision: str = PRECISION
    threads: int = THREADS
    check_interval: int = INSTABILITY_CHECK_INTERVAL
    sponge_velocity: float = SPONGE_REFERENCE_VELOCITY

    def __post_init__(self):
        if self.precision not in ("float32", "float64"):
            raise ArgumentError(f"precision must be float32 or float64, got {self.precision!r}")
        if self.spatial_order % 2 or self.spatial_order < 2:
            raise ArgumentError("spatial_order must be a positive even integer")
        if self.check_interval < 1:
            raise ArgumentError("check_interval must be >= 1")

    @property
    def dtype(self) -> np.dtype:
        return np.dtype(self.precision)


def stable_dt(model: VelocityModel, spatial_order: int = DEFAULT_SPATIAL_ORDER) -> float:
    """
    Largest time step satisfying the CFL condition for the model.

    Args:
        model: Velocity model
        spatial_order: Spatial accuracy order of the stencil

    Returns:
        cfl_coefficient * min(dz, dx) / v_max in seconds
    """
    return cfl_coefficient(spatial_order) * min(model.spacing) / model.v_max


def damping_profile(
    shape: Tuple[int, int],
    width: int,
    spacing: Tuple[float, float],
    velocity: float = SPONGE_REFERENCE_VELOCITY,
) -> np.ndarray:
    """
    Sponge coefficient eta (s/m^2) on the padded grid, zero in the interior.

    The profile grows quadratically across the layer; a wave travelling at
    ``velocity`` decays exponentially while crossing it.
    """
    eta = np.zeros(shape)
    if width == 0:
        return eta
    profiles = []
    for axis, n in enumerate(shape):
        cells = np.arange(n)
        depth = np.maximum(np.maximum(width - cells, cells - (n - 1 - width)), 0) / width
        sigma_max = 3.0 * velocity * math.log(1.0 / SPONGE_REFLECTION) / (2.0 * width * spacing[axis])
        profiles.append(sigma_max * depth**2)
    eta += profiles[0][:, None] + profiles[1][None, :]
    return eta / velocity**2


def fold_padding(padded: np.ndarray, width: int) -> np.ndarray:
    """Adjoint of ``np.pad(x, width, mode="edge")`` for a 2D array."""
    if width == 0:
        return padded.copy()
    g = padded.copy()
    g[width, :] += g[:width, :].sum(axis=0)
    g[-width - 1, :] += g[-width:, :].sum(axis=0)
    g = g[width:-width, :]
    g[:, width] += g[:, :width].sum(axis=1)
    g[:, -width - 1] += g[:, -width:].sum(axis=1)
    return g[:, width:-width].copy()


@dataclass
class PointOperator:
    """Bilinear injection/sampling weights of a set of points on the haloed grid."""

    rows: np.ndarray
    cols: np.ndarray
    weights: np.ndarray
    inject_weights: np.ndarray

    @property
    def n_points(self) -> int:
        return self.weights.shape[0]


class PropagationContext:
    """
    Owns every array needed to march one model at one dt.

    Contexts are independent of each other and safe to use from different
    threads.
    """

    def __init__(self, model: VelocityModel, dt: float, settings: PropagatorSettings):
        order = settings.spatial_order
        if min(model.shape) < 3 + order:
            raise ArgumentError(
                f"model shape {model.shape} too small for spatial order {order}"
            )
        if dt <= 0:
            raise ArgumentError("dt must be positive")
        limit = stable_dt(model, order)
        if dt > limit * (1.0 + 1e-9):
            logger.warning("dt %.3e s exceeds the stable bound %.3e s", dt, limit)

        self.model = model
        self.dt = float(dt)
        self.dt2 = self.dt * self.dt
        self.settings = settings
        self.width = model.absorbing_width
        self.radius = order // 2

        dtype = settings.dtype
        m = np.pad(model.slowness_sq.astype(np.float64), self.width, mode="edge")
        eta = damping_profile(m.shape, self.width, model.spacing, settings.sponge_velocity)
        half = eta * (self.dt / 2.0)
        self.shape: Tuple[int, int] = m.shape  # type: ignore[assignment]
        self.inv_d = (1.0 / (m + half)).astype(dtype)
        self.two_m = (2.0 * m).astype(dtype)
        self.b = (m - half).astype(dtype)

        self.laplacian = Laplacian(self.shape, model.spacing, order, settings.threads)
        self._lap = np.empty(self.shape, dtype)
        self._tmp = np.empty(self.shape, dtype)
        r = self.radius
        self.interior = (slice(r, r + self.shape[0]), slice(r, r + self.shape[1]))

    @property
    def dtype(self) -> np.dtype:
        return self.settings.dtype

    def new_field(self) -> np.ndarray:
        r = self.radius
        return np.zeros((self.shape[0] + 2 * r, self.shape[1] + 2 * r), self.dtype)

    def load_field(self, interior: np.ndarray) -> np.ndarray:
        f = self.new_field()
        f[self.interior] = interior
        return f

    def point_operator(self, positions: Sequence[Position]) -> PointOperator:
        """Bilinear weights of physical (z, x) positions on the haloed grid."""
        nz, nx = self.model.shape
        dz, dx = self.model.spacing
        oz, ox = self.model.origin
        offset = self.width + self.radius
        rows, cols, weights = [], [], []
        for z, x in positions:
            gz = (z - oz) / dz
            gx = (x - ox) / dx
            iz = min(int(math.floor(gz)), nz - 2)
            ix = min(int(math.floor(gx)), nx - 2)
            fz = gz - iz
            fx = gx - ix
            rows.append([iz, iz, iz + 1, iz + 1])
            cols.append([ix, ix + 1, ix, ix + 1])
            weights.append(
                [(1 - fz) * (1 - fx), (1 - fz) * fx, fz * (1 - fx), fz * fx]
            )
        rows_arr = np.asarray(rows, dtype=np.intp) + offset
        cols_arr = np.asarray(cols, dtype=np.intp) + offset
        w = np.asarray(weights, dtype=np.float64)
        r = self.radius
        scale = self.inv_d[rows_arr - r, cols_arr - r].astype(np.float64)
        return PointOperator(rows_arr, cols_arr, w, w * scale)

    def step(self, cur: np.ndarray, prev: np.ndarray, out: np.ndarray) -> None:
        """Write D^-1 (G cur - B prev) into the interior of ``out``."""
        lap = self.laplacian.apply(cur, self._lap)
        nxt = out[self.interior]
        np.multiply(self.two_m, cur[self.interior], out=nxt)
        lap *= self.dt2
        nxt += lap
        np.multiply(self.b, prev[self.interior], out=self._tmp)
        nxt -= self._tmp
        nxt *= self.inv_d

    @staticmethod
    def inject(field_: np.ndarray, op: PointOperator, values: np.ndarray) -> None:
        """Add D^-1-scaled bilinear contributions of ``values`` (one per point)."""
        contrib = op.inject_weights * np.asarray(values, dtype=np.float64)[:, None]
        np.add.at(field_, (op.rows, op.cols), contrib.astype(field_.dtype))

    @staticmethod
    def sample(field_: np.ndarray, op: PointOperator) -> np.ndarray:
        return (field_[op.rows, op.cols].astype(np.float64) * op.weights).sum(axis=1)

    def check_finite(self, field_: np.ndarray, step: int) -> None:
        if not np.isfinite(field_).all():
            raise NumericalInstabilityError(step)

    def close(self) -> None:
        self.laplacian.close()


@dataclass
class WavefieldHandle:
    """Forward wavefield storage plus what is needed to recompute it."""

    mode: SaveMode
    stored: Stored
    dt: float
    nt: int
    context: Optional[PropagationContext] = field(default=None, repr=False)
    source: Optional[PointOperator] = field(default=None, repr=False)
    wavelet: Optional[np.ndarray] = field(default=None, repr=False)
    geometry: Optional[AcquisitionGeometry] = field(default=None, repr=False)

    @property
    def n_stored(self) -> int:
        if self.mode.kind == "full":
            return len(self.stored.snapshots)
        return len(self.stored.checkpoints)


def _resolve_settings(settings: Optional[PropagatorSettings]) -> PropagatorSettings:
    return settings if settings is not None else PropagatorSettings()


def forward(
    model: VelocityModel,
    geometry: AcquisitionGeometry,
    wavelet: np.ndarray,
    save_mode: SaveMode = SaveMode.full(),
    dt: Optional[float] = None,
    settings: Optional[PropagatorSettings] = None,
) -> Tuple[ShotRecord, WavefieldHandle]:
    """
    Model one shot.

    Args:
        model: Velocity model
        geometry: Source/receiver layout and record length
        wavelet: Source trace, at least nt samples long
        save_mode: Forward wavefield storage policy
        dt: Time step (default: stable_dt of the model)
        settings: Propagator settings

    Returns:
        (ShotRecord, WavefieldHandle)

    Raises:
        ArgumentError: If positions lie outside the model or the wavelet is too short
        NumericalInstabilityError: If the wavefield becomes non-finite
    """
    settings = _resolve_settings(settings)
    dt = float(dt) if dt is not None else stable_dt(model, settings.spatial_order)
    geometry.validate_inside(model)
    nt = num_timesteps(geometry.record_time, dt)
    q = np.asarray(wavelet, dtype=np.float64)
    if q.ndim != 1 or q.shape[0] < nt:
        raise ArgumentError(f"wavelet needs at least {nt} samples, got {q.shape}")
    q = q[:nt]

    ctx = PropagationContext(model, dt, settings)
    src = ctx.point_operator([geometry.source_pos])
    rec = ctx.point_operator(geometry.receiver_pos)
    data = np.zeros((nt, geometry.n_receivers), dtype=np.float64)
    stored = Stored()

    def keep(n: int, cur: np.ndarray, prev: np.ndarray) -> None:
        data[n] = ctx.sample(cur, rec)
        if save_mode.kind == "full":
            stored.snapshots.append(cur[ctx.interior].copy())
        elif save_mode.kind == "interval" and n % save_mode.interval == 0:
            stored.checkpoints.append(
                (n, cur[ctx.interior].copy(), prev[ctx.interior].copy())
            )

    # On success the handle owns ctx and the caller closes it.
    try:
        prev, cur, spare = ctx.new_field(), ctx.new_field(), ctx.new_field()
        keep(0, cur, prev)
        with np.errstate(over="ignore", invalid="ignore"):
            for n in range(nt - 1):
                ctx.step(cur, prev, spare)
                ctx.inject(spare, src, [ctx.dt2 * q[n]])
                prev, cur, spare = cur, spare, prev
                if (n + 1) % settings.check_interval == 0 or n + 1 == nt - 1:
                    ctx.check_finite(cur, n + 1)
                keep(n + 1, cur, prev)
    except BaseException:
        ctx.close()
        raise

    record = ShotRecord(geometry, dt, data)
    handle = WavefieldHandle(save_mode, stored, dt, nt, ctx, src, q, geometry)
    logger.debug(
        "Forward modeled %d steps on %s grid, stored %d states", nt, ctx.shape, handle.n_stored
    )
    return record, handle


def _check_residual(geometry: AcquisitionGeometry, residual: ShotRecord) -> None:
    if residual.geometry.receiver_pos != geometry.receiver_pos:
        raise ArgumentError("residual receivers do not match the geometry")
    if residual.geometry.source_pos != geometry.source_pos:
        raise ArgumentError("residual source does not match the geometry")


def adjoint_forward(
    model: VelocityModel,
    geometry: AcquisitionGeometry,
    residual: ShotRecord,
    settings: Optional[PropagatorSettings] = None,
) -> np.ndarray:
    """
    Data-to-source adjoint of the linear map from wavelet to receiver data.

    Injects the residual at the receivers, propagates backwards in time and
    samples at the source position.

    Args:
        model: Velocity model used by the forward run
        geometry: Acquisition geometry used by the forward run
        residual: Data-space vector with the record's shape and dt

    Returns:
        Source-side trace of length nt
    """
    settings = _resolve_settings(settings)
    _check_residual(geometry, residual)
    geometry.validate_inside(model)
    ctx = PropagationContext(model, residual.dt, settings)
    try:
        src = ctx.point_operator([geometry.source_pos])
        rec = ctx.point_operator(geometry.receiver_pos)
        nt = residual.nt
        y = np.asarray(residual.data, dtype=np.float64)
        out = np.zeros(nt)

        later, last, spare = ctx.new_field(), ctx.new_field(), ctx.new_field()
        with np.errstate(over="ignore", invalid="ignore"):
            for k in range(nt - 1, 0, -1):
                ctx.step(last, later, spare)
                ctx.inject(spare, rec, y[k])
                out[k - 1] = ctx.dt2 * ctx.sample(spare, src)[0]
                later, last, spare = last, spare, later
                if k % settings.check_interval == 0:
                    ctx.check_finite(last, k)
    finally:
        ctx.close()
    return out


def _reverse_states(handle: WavefieldHandle) -> Iterator[np.ndarray]:
    """Yield forward states u[nt-1], u[nt-2], ..., u[0], u[-1] (interior arrays)."""
    ctx = handle.context
    assert ctx is not None
    zeros = np.zeros(ctx.shape, ctx.dtype)
    if handle.mode.kind == "full":
        for snapshot in reversed(handle.stored.snapshots):
            yield snapshot
        yield zeros
        return

    k = handle.mode.interval
    q = handle.wavelet
    for start, u_start, u_before in reversed(handle.stored.checkpoints):
        stop = min(start + k, handle.nt)
        states: List[np.ndarray] = [u_start]
        prev, cur, spare = ctx.load_field(u_before), ctx.load_field(u_start), ctx.new_field()
        for n in range(start, stop - 1):
            ctx.step(cur, prev, spare)
            ctx.inject(spare, handle.source, [ctx.dt2 * q[n]])
            prev, cur, spare = cur, spare, prev
            states.append(cur[ctx.interior].copy())
        for state in reversed(states):
            yield state
    yield zeros


def adjoint_gradient(
    model: VelocityModel, handle: WavefieldHandle, residual: ShotRecord
) -> np.ndarray:
    """
    Gradient of 0.5 ||F(m) - d||^2 with respect to squared slowness.

    Args:
        model: The model the handle was produced on
        handle: Forward wavefield handle (full or interval mode)
        residual: Modeled minus observed data

    Returns:
        (nz, nx) float64 gradient

    Raises:
        ArgumentError: If handle and residual do not belong together
    """
    ctx = handle.context
    if ctx is None or handle.mode.kind == "none":
        raise ArgumentError("handle carries no forward wavefield")
    if ctx.model is not model and (
        ctx.model.shape != model.shape
        or not np.array_equal(ctx.model.slowness_sq, model.slowness_sq)
    ):
        raise ArgumentError("handle was produced on a different model")
    if residual.nt != handle.nt or not math.isclose(residual.dt, handle.dt):
        raise ArgumentError(
            f"residual sampling ({residual.nt}, {residual.dt}) does not match handle "
            f"({handle.nt}, {handle.dt})"
        )
    if handle.geometry is not None:
        _check_residual(handle.geometry, residual)

    rec = ctx.point_operator(residual.geometry.receiver_pos)
    y = np.asarray(residual.data, dtype=np.float64)
    grad = np.zeros(ctx.shape, dtype=np.float64)
    states = _reverse_states(handle)
    u_k = next(states)
    u_km1 = next(states)
    later, last, spare = ctx.new_field(), ctx.new_field(), ctx.new_field()
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(handle.nt - 1, 0, -1):
            u_km2 = next(states)
            ctx.step(last, later, spare)
            ctx.inject(spare, rec, y[k])
            grad -= spare[ctx.interior] * (u_k - 2 * u_km1 + u_km2)
            later, last, spare = last, spare, later
            u_k, u_km1 = u_km1, u_km2
            if k % ctx.settings.check_interval == 0:
                ctx.check_finite(last, k)
    return fold_padding(grad, ctx.width)
