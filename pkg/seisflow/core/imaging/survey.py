"""
Surveys, inversion settings and run history.

Problems are described in JSON. A two-layer problem moves one surface
source across the model with a receiver spread of fixed half-offset around
it, and synthesizes the observed data from the true model:

    {
      "model": {"shape": [201, 401], "spacing": 10.0, "velocities": [1500, 2000],
                "interface_depth": 600.0, "absorbing_width": 30, "initial_velocity": 1500},
      "survey": {"n_shots": 20, "half_offset": 1000.0, "receiver_step": 2, "depth": 20.0,
                 "record_time": 1.2, "f0": 10.0, "dt_safety": 0.75},
      "imaging": {"aperture": 2000.0, "save_mode": "interval:10", "mute_depth": 150.0},
      "inversion": {"n_iterations": 10, "batch_size": 4, "step_size": "auto", "seed": 7}
    }
"""
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from seisflow.core.constants import DEFAULT_ABSORBING_WIDTH
from seisflow.core.errors import ArgumentError, ConfigError
from seisflow.core.imaging.objective import ImagingOptions, synthesize_shot
from seisflow.core.wavekit.grid import (
    AcquisitionGeometry,
    SaveMode,
    ShotRecord,
    VelocityModel,
    two_layer_model,
)
from seisflow.core.wavekit.propagator import PropagatorSettings, stable_dt
from seisflow.core.wavekit.wavelet import num_timesteps

# Configure logging
logger = logging.getLogger(__name__)

HISTORY_COLUMNS = ["iteration", "misfit", "grad_norm", "wall_s", "shots"]


@dataclass
class Survey:
    """Observed shots plus the model used to synthesize them."""

    model_true: VelocityModel
    shots: List[ShotRecord]

    def __post_init__(self):
        if not self.shots:
            raise ArgumentError("a survey needs at least one shot")

    @property
    def n_s(self) -> int:
        return len(self.shots)

    @property
    def dt(self) -> float:
        return self.shots[0].dt


@dataclass
class InversionConfig:
    """
    Settings of the SGD loop.

    Attributes:
        n_iterations: Number of SGD iterations
        batch_size: Shots per iteration (n_b)
        step_size: Fixed step, or None to estimate it once before the loop
        seed: Seed of the batch sampler
        initial_model: Starting model
        options: Shot modeling options
        gradient_tolerance: Stop early once a gradient norm falls below it; the
            history then holds fewer than n_iterations records and the stop
            is logged at INFO
    """

    n_iterations: int
    batch_size: int
    initial_model: VelocityModel
    step_size: Optional[float] = None
    seed: int = 0
    options: ImagingOptions = field(default_factory=ImagingOptions)
    gradient_tolerance: Optional[float] = None

    def __post_init__(self):
        if self.n_iterations < 1:
            raise ConfigError("n_iterations must be >= 1")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1")
        if self.step_size is not None and self.step_size < 0:
            raise ConfigError("step_size must be non-negative")

    def validate(self, survey: Survey) -> None:
        if self.batch_size > survey.n_s:
            raise ConfigError(f"batch_size {self.batch_size} exceeds {survey.n_s} shots")
        if self.initial_model.shape != survey.model_true.shape:
            raise ConfigError("initial model and survey model differ in shape")


@dataclass
class IterationRecord:
    iteration: int
    shots: List[int]
    misfit: float
    grad_norm: float
    wall_s: float


class InversionHistory:
    """Per-iteration record of an inversion run."""

    def __init__(self, step_size: float = 0.0):
        self.records: List[IterationRecord] = []
        self.step_size = step_size

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def append(self, record: IterationRecord) -> None:
        self.records.append(record)

    @property
    def misfits(self) -> List[float]:
        return [r.misfit for r in self.records]

    def to_frame(self) -> pd.DataFrame:
        rows = [
            {
                "iteration": r.iteration,
                "misfit": r.misfit,
                "grad_norm": r.grad_norm,
                "wall_s": r.wall_s,
                "shots": " ".join(str(s) for s in r.shots),
            }
            for r in self.records
        ]
        return pd.DataFrame(rows, columns=HISTORY_COLUMNS)

    def write_csv(self, path: Union[str, Path], columns: Optional[Sequence[str]] = None) -> Path:
        """Write the history (optionally a subset of its columns) as CSV."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.to_frame().to_csv(path, index=False, columns=columns, float_format="%.10g")
        return path


def surface_shots(
    model: VelocityModel,
    n_shots: int,
    half_offset: float,
    receiver_step: int,
    depth: float,
    record_time: float,
    f0: float,
) -> List[AcquisitionGeometry]:
    """Sources evenly spread along the surface, receivers within half_offset of each."""
    if n_shots < 1:
        raise ConfigError("n_shots must be >= 1")
    width = model.extent[1]
    dx = model.spacing[1]
    margin = min(half_offset / 4.0, width / 4.0)
    xs = np.linspace(margin, width - margin, n_shots)
    grid_x = np.arange(0, model.shape[1], max(1, receiver_step)) * dx
    geometries = []
    for sx in xs:
        sx = round(float(sx) / dx) * dx
        receivers = [(depth, float(x)) for x in grid_x if abs(x - sx) <= half_offset + 1e-9]
        geometries.append(AcquisitionGeometry((depth, sx), receivers, record_time, f0))
    return geometries


def synthesize_survey(
    model_true: VelocityModel,
    geometries: Sequence[AcquisitionGeometry],
    dt: float,
    options: Optional[ImagingOptions] = None,
) -> Survey:
    """Model every shot on the true model."""
    shots = []
    for geometry in geometries:
        nt = num_timesteps(geometry.record_time, dt)
        template = ShotRecord(geometry, dt, np.zeros((nt, geometry.n_receivers)))
        shots.append(synthesize_shot(model_true, template, options))
    logger.info("Synthesized %d shots with dt=%.3e s", len(shots), dt)
    return Survey(model_true, shots)


def _get(section: Mapping[str, Any], key: str, default: Any = None, required: bool = False) -> Any:
    if key not in section:
        if required:
            raise ConfigError(f"missing field {key!r}")
        return default
    return section[key]


@dataclass
class Problem:
    """A survey together with the settings to invert it."""

    survey: Survey
    config: InversionConfig
    deterministic_reduction: bool = True
    max_object_elems: Optional[int] = None
    n_queues: int = 1


def problem_from_dict(data: Mapping[str, Any], seed: Optional[int] = None) -> Problem:
    """
    Build and synthesize a problem from its JSON description.

    Raises:
        ConfigError: On missing or invalid fields
    """
    try:
        m = data["model"]
        s = data["survey"]
        inv = data["inversion"]
    except KeyError as e:
        raise ConfigError(f"problem misses section {e.args[0]!r}") from e
    im = data.get("imaging", {})

    shape: Tuple[int, int] = tuple(int(n) for n in _get(m, "shape", required=True))  # type: ignore
    spacing = float(_get(m, "spacing", required=True))
    v_top, v_bottom = (float(v) for v in _get(m, "velocities", required=True))
    width = int(_get(m, "absorbing_width", DEFAULT_ABSORBING_WIDTH))
    try:
        model_true = two_layer_model(
            shape, (spacing, spacing), v_top, v_bottom, float(_get(m, "interface_depth", required=True)), width
        )
        initial = VelocityModel.from_velocity(
            np.full(shape, float(_get(m, "initial_velocity", v_top))), (spacing, spacing), absorbing_width=width
        )
        settings = PropagatorSettings(
            spatial_order=int(_get(im, "spatial_order", PropagatorSettings().spatial_order))
        )
        options = ImagingOptions(
            aperture=_get(im, "aperture"),
            save_mode=SaveMode.parse(_get(im, "save_mode", "full")),
            mute_depth=float(_get(im, "mute_depth", 0.0)),
            settings=settings,
        )
    except ArgumentError as e:
        raise ConfigError(f"invalid problem: {e}") from e

    dt = float(_get(s, "dt_safety", 0.75)) * stable_dt(model_true, settings.spatial_order)
    geometries = surface_shots(
        model_true,
        int(_get(s, "n_shots", required=True)),
        float(_get(s, "half_offset", model_true.extent[1])),
        int(_get(s, "receiver_step", 1)),
        float(_get(s, "depth", 2 * spacing)),
        float(_get(s, "record_time", required=True)),
        float(_get(s, "f0", required=True)),
    )
    survey = synthesize_survey(model_true, geometries, dt, options)

    step = _get(inv, "step_size", "auto")
    if step != "auto" and not isinstance(step, (int, float)):
        raise ConfigError("step_size must be a number or \"auto\"")
    config = InversionConfig(
        n_iterations=int(_get(inv, "n_iterations", required=True)),
        batch_size=int(_get(inv, "batch_size", required=True)),
        initial_model=initial,
        step_size=None if step == "auto" else float(step),
        seed=int(seed if seed is not None else _get(inv, "seed", 0)),
        options=options,
        gradient_tolerance=_get(inv, "gradient_tolerance"),
    )
    config.validate(survey)
    red = data.get("reduction", {})
    return Problem(
        survey,
        config,
        bool(_get(red, "deterministic", True)),
        _get(red, "max_object_elems"),
        int(_get(red, "n_queues", 1)),
    )


def load_problem(path: Union[str, Path], seed: Optional[int] = None) -> Problem:
    """
    Read a problem JSON file and synthesize its survey.

    Raises:
        ConfigError: If the file is missing, malformed or invalid
    """
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except OSError as e:
        raise ConfigError(f"cannot read problem {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"problem {path} is not valid JSON: {e}") from e
    if not isinstance(data, dict):
        raise ConfigError(f"problem {path} must hold a JSON object")
    logger.info("Loading problem %s", path)
    return problem_from_dict(data, seed)
