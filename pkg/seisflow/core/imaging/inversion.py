"""
Fixed-step SGD inversion driver.
"""
import logging
import time
from dataclasses import dataclass
from typing import Optional

import numpy as np

from seisflow.core.errors import BackendError, SeisflowError
from seisflow.core.hooks import LifecycleEvent
from seisflow.core.imaging.interfaces import InversionBackend
from seisflow.core.imaging.objective import evaluate_shot, total_misfit
from seisflow.core.imaging.optimizer import estimate_step_size, sample_batch
from seisflow.core.imaging.survey import InversionConfig, InversionHistory, Survey
from seisflow.core.reducer.tree import tree_sum
from seisflow.core.wavekit.grid import VelocityModel

# Configure logging
logger = logging.getLogger(__name__)


@dataclass
class InversionResult:
    model: VelocityModel
    history: InversionHistory
    step_size: float
    backend: str
    elapsed_s: float


def resolve_step_size(survey: Survey, config: InversionConfig) -> float:
    """
    The configured step, or one estimated on a trial batch.

    The trial batch is drawn from its own generator so the batches of the
    loop do not depend on whether the step was estimated.
    """
    if config.step_size is not None:
        return float(config.step_size)
    rng = np.random.default_rng([config.seed, 1])
    shots = [survey.shots[i] for i in sample_batch(survey.n_s, config.batch_size, rng)]
    initial = config.initial_model
    x = initial.slowness_sq.astype(np.float32)
    model = initial.with_slowness(x.astype(np.float64))

    phi0 = 0.0
    grads = []
    for shot in shots:
        value, grad = evaluate_shot(model, shot, config.options)
        phi0 += value
        grads.append(grad.astype(np.float32))
    g = tree_sum(grads)

    def objective(candidate: np.ndarray) -> float:
        return total_misfit(initial.with_slowness(candidate.astype(np.float64)), shots, config.options)

    return estimate_step_size(x, g, phi0, objective)


def run_inversion(survey: Survey, config: InversionConfig, backend: InversionBackend) -> InversionResult:
    """
    Invert a survey with fixed-step SGD.

    Args:
        survey: Observed shots
        config: Loop settings; a step_size of None is estimated once
        backend: Where the iterations run

    Returns:
        InversionResult

    Raises:
        ConfigError: If the settings do not fit the survey
        BackendError: If an iteration fails
    """
    config.validate(survey)
    start = time.time()
    backend.trigger_callback(
        LifecycleEvent.BEFORE_INVERSION,
        {"backend": backend.name, "n_iterations": config.n_iterations, "batch_size": config.batch_size},
    )
    try:
        step = resolve_step_size(survey, config)
        logger.info(
            "Running %d iterations of batch %d on %s with step %.4e",
            config.n_iterations,
            config.batch_size,
            backend.name,
            step,
        )
        model, history = backend.run(survey, config, step)
    except BackendError as e:
        backend.trigger_callback(LifecycleEvent.ON_ERROR, {"iteration": e.iteration, "error": e})
        raise
    except SeisflowError as e:
        backend.trigger_callback(LifecycleEvent.ON_ERROR, {"iteration": -1, "error": e})
        raise

    result = InversionResult(model, history, step, backend.name, time.time() - start)
    backend.trigger_callback(
        LifecycleEvent.AFTER_INVERSION, {"history": history, "step_size": step, "backend": backend.name}
    )
    return result
