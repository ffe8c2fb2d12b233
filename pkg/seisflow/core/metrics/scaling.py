"""
Weak-scaling experiment on the simulated cloud.

Each run is one gradient iteration with a growing batch: an array job with
one task per shot publishes synthetic gradients, the queue-triggered
reducer sums them and the update function writes the next model. Its
time-to-solution splits into the batch startup of the slowest task, that
task's container runtime and the reduction tail between the last gradient
object and the updated model.
"""
import logging
from typing import Callable, Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd

from seisflow.core.cloudsim.batch import ArrayJob, BatchJob, submit_array_job
from seisflow.core.cloudsim.scenario import Scenario
from seisflow.core.cloudsim.world import SimWorld
from seisflow.core.errors import ArgumentError, SimulationError
from seisflow.core.reducer.chunking import model_key, plan_chunks
from seisflow.core.reducer.driver import attach_reducers, completion_time, publish_gradient
from seisflow.core.reducer.handler import GradientReducer
from seisflow.core.reducer.update import ModelUpdater

# Configure logging
logger = logging.getLogger(__name__)

# Runtime of one gradient container (s), or callable(batch size, task index)
ScalingRuntime = Union[float, Callable[[int, int], float]]

DEFAULT_GRADIENT_ELEMS = 4096
DEFAULT_REPETITIONS = 3

RUN_COLUMNS = [
    "n_b",
    "repetition",
    "startup_mean_s",
    "runtime_mean_s",
    "critical_startup_s",
    "critical_runtime_s",
    "reduction_s",
    "update_s",
    "tail_s",
    "total_s",
    "cost",
]


def _run_seed(seed, n_b: int, repetition: int) -> List[int]:
    base = [int(seed)] if np.isscalar(seed) else [int(s) for s in seed]
    return base + [n_b, repetition]


def scaling_iteration(
    world: SimWorld,
    n_b: int,
    runtime: ScalingRuntime,
    gradient_elems: int = DEFAULT_GRADIENT_ELEMS,
    max_object_elems: Optional[int] = None,
    n_queues: int = 1,
    deterministic: bool = True,
) -> Dict[str, float]:
    """
    Run one simulated gradient iteration with ``n_b`` tasks.

    Returns:
        Timing components in seconds and the iteration cost in $

    Raises:
        SimulationError: If the updated model is never written
    """
    if n_b < 1:
        raise ArgumentError(f"batch size must be positive, got {n_b}")
    plan = plan_chunks(gradient_elems, max_object_elems or gradient_elems, n_queues)
    updater = ModelUpdater(plan, step_size=1.0)
    triggers = attach_reducers(world, plan, GradientReducer(deterministic, updater))
    world.store.put_array(model_key(0), np.zeros(gradient_elems, dtype=np.float32))
    gradient = world.rng.standard_normal(gradient_elems).astype(np.float32)

    def action(w: SimWorld, index: int) -> None:
        publish_gradient(w, plan, gradient, shot=index, position=index, n_b=n_b)

    job_id = submit_array_job(
        world,
        BatchJob(
            f"scaling-nb{n_b}",
            ArrayJob(n_b),
            (lambda i: runtime(n_b, i)) if callable(runtime) else float(runtime),
            action=action,
        ),
    )
    world.run_until_idle()
    for trigger in triggers:
        trigger.close()
    if not world.store.exists(model_key(1)):
        raise SimulationError(f"batch of {n_b}: the updated model was never written")

    record = world.jobs[job_id]
    starts = np.array([t.start for t in record.tasks]) - record.submitted_at
    runtimes = np.array([t.end - t.start for t in record.tasks])
    critical = int(np.argmax([t.end for t in record.tasks]))
    last_gradient = record.tasks[critical].end
    updated = world.store.written_at(model_key(1))
    update = updater.invocations[-1]
    return {
        "startup_mean_s": float(starts.mean()),
        "runtime_mean_s": float(runtimes.mean()),
        "critical_startup_s": float(starts[critical]),
        "critical_runtime_s": float(runtimes[critical]),
        "reduction_s": completion_time(world, plan) - last_gradient,
        "update_s": float(update.duration),
        "tail_s": updated - last_gradient,
        "total_s": updated - record.submitted_at,
        "cost": world.total_cost(),
    }


def weak_scaling_experiment(
    scenario: Scenario,
    batch_sizes: Sequence[int],
    runtime: ScalingRuntime,
    repetitions: int = DEFAULT_REPETITIONS,
    gradient_elems: int = DEFAULT_GRADIENT_ELEMS,
    max_object_elems: Optional[int] = None,
    n_queues: int = 1,
) -> pd.DataFrame:
    """
    Time-to-solution of one iteration for increasing batch sizes.

    Every (batch size, repetition) pair runs in its own world seeded from
    the scenario seed, the batch size and the repetition.

    Args:
        scenario: Simulated cloud
        batch_sizes: Batch sizes to run
        runtime: Container runtime of a gradient task
        repetitions: Runs per batch size
        gradient_elems: Size of the synthetic gradient
        max_object_elems: Largest gradient chunk
        n_queues: Reduction queues

    Returns:
        One row per run with the columns of ``RUN_COLUMNS``
    """
    if repetitions < 1:
        raise ArgumentError("need at least one repetition")
    rows = []
    for n_b in batch_sizes:
        for rep in range(repetitions):
            world = scenario.build_world(_run_seed(scenario.seed, n_b, rep))
            timings = scaling_iteration(
                world, n_b, runtime, gradient_elems, max_object_elems, n_queues
            )
            rows.append({"n_b": int(n_b), "repetition": rep, **timings})
        logger.info("Batch size %d: %d runs done", n_b, repetitions)
    return pd.DataFrame(rows, columns=RUN_COLUMNS)


def summarize_scaling(runs: pd.DataFrame) -> pd.DataFrame:
    """Mean and standard deviation of every component per batch size."""
    components = ["startup_mean_s", "runtime_mean_s", "tail_s", "total_s", "cost"]
    grouped = runs.groupby("n_b", sort=True)[components]
    summary = grouped.mean().add_suffix("_mean").join(grouped.std(ddof=0).add_suffix("_std"))
    return summary.reset_index()
