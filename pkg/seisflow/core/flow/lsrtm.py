"""
Operations and predicates of the serverless LS-RTM workflow.

``CreateQueues`` creates the reduction queues, maps them to the reducer
function and stores the initial model. ``ComputeGradient`` draws a batch
and submits one array job whose tasks each model a shot, store its misfit
and publish its gradient. The reducer sums the gradients as they arrive and
the model update runs once the sum is complete; ``CheckGradientStatus``
only sees the iteration as done when the updated model exists.
``CleanUp`` tears the queues down.
"""
import json
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Union

import numpy as np

from seisflow.core.cloudsim.batch import ArrayJob, BatchJob, OnDemand, Pricing, submit_array_job
from seisflow.core.cloudsim.queue import QueueTrigger
from seisflow.core.cloudsim.world import SimWorld
from seisflow.core.constants import DEFAULT_INSTANCE_TYPE, MAX_OBJECT_ELEMS, REDUCER_MEMORY_GB
from seisflow.core.errors import ProtocolError
from seisflow.core.flow.executor import Bindings
from seisflow.core.imaging.objective import evaluate_shot
from seisflow.core.imaging.optimizer import sample_batch
from seisflow.core.imaging.survey import InversionConfig, IterationRecord, Survey
from seisflow.core.reducer.chunking import ChunkPlan, misfit_key, model_key, plan_chunks
from seisflow.core.reducer.driver import attach_reducers, publish_gradient
from seisflow.core.reducer.handler import GradientReducer
from seisflow.core.reducer.update import ModelUpdater
from seisflow.core.wavekit.grid import VelocityModel

# Configure logging
logger = logging.getLogger(__name__)

# Modeled container runtime of one gradient task (s)
GRADIENT_TASK_RUNTIME_S = 240.0

TaskRuntime = Union[float, Callable[[int], float]]


@dataclass
class LsrtmRun:
    """
    Shared state of one workflow execution.

    Attributes:
        survey: Observed shots
        config: SGD settings (its step_size must be resolved)
        step_size: Fixed SGD step
        deterministic: Reduce in the binary pairing order
        max_object_elems: Largest gradient chunk
        n_queues: Reduction queues the chunks are spread over
        task_runtime: Modeled runtime of a gradient task, or callable(index)
        instance_type: Instance type of the gradient tasks
        pricing: Pricing of the gradient tasks
        queue_prefix: Prefix of the reduction queue names
    """

    survey: Survey
    config: InversionConfig
    step_size: float
    deterministic: bool = True
    max_object_elems: int = MAX_OBJECT_ELEMS
    n_queues: int = 1
    task_runtime: TaskRuntime = GRADIENT_TASK_RUNTIME_S
    instance_type: str = DEFAULT_INSTANCE_TYPE
    pricing: Pricing = field(default_factory=OnDemand)
    queue_prefix: str = "grad"
    memory_gb: float = REDUCER_MEMORY_GB
    next_iteration: int = 0
    batches: Dict[int, List[int]] = field(default_factory=dict)
    job_ids: Dict[int, str] = field(default_factory=dict)
    triggers: List[QueueTrigger] = field(default_factory=list)

    def __post_init__(self):
        self.rng = np.random.default_rng(self.config.seed)
        self.plan: ChunkPlan = plan_chunks(
            int(np.prod(self.survey.model_true.shape)), self.max_object_elems, self.n_queues
        )
        self.updater = ModelUpdater(self.plan, self.step_size, self.memory_gb)

    @property
    def current(self) -> int:
        """Iteration whose gradient was submitted last."""
        return self.next_iteration - 1

    def model_at(self, world: SimWorld, iteration: int) -> VelocityModel:
        x = world.store.get_array(model_key(iteration))
        return self.config.initial_model.with_slowness(x.astype(np.float64))

    def records(self, world: SimWorld) -> List[IterationRecord]:
        """Per-iteration history read back from the store."""
        out = []
        for it in range(self.next_iteration):
            key = model_key(it + 1)
            if not world.store.exists(key):
                break
            shots = self.batches[it]
            total = 0.0
            for shot in shots:
                total += json.loads(world.store.get(misfit_key(it, shot)).decode())["misfit"]
            out.append(
                IterationRecord(
                    it,
                    list(shots),
                    total,
                    float(world.store.head(key)["grad_norm"]),
                    world.store.written_at(key) - world.store.written_at(model_key(it)),
                )
            )
        return out


def _gradient_task(world: SimWorld, run: LsrtmRun, iteration: int, position: int) -> None:
    shot = run.batches[iteration][position]
    model = run.model_at(world, iteration)
    phi, grad = evaluate_shot(model, run.survey.shots[shot], run.config.options)
    world.store.put(misfit_key(iteration, shot), json.dumps({"misfit": phi}).encode(), {"shot": shot})
    publish_gradient(
        world,
        run.plan,
        grad.astype(np.float32),
        shot,
        position,
        run.config.batch_size,
        iteration,
        run.queue_prefix,
    )


def create_queues(world: SimWorld, run: LsrtmRun) -> None:
    handler = GradientReducer(deterministic=run.deterministic, updater=run.updater)
    run.triggers = attach_reducers(world, run.plan, handler, run.queue_prefix, run.memory_gb)
    x0 = run.config.initial_model.slowness_sq.astype(np.float32)
    world.store.put_array(model_key(0), x0, {"iteration": 0})


def compute_gradient(world: SimWorld, run: LsrtmRun) -> str:
    it = run.next_iteration
    # A retried submit keeps the batch drawn by the first attempt.
    if it not in run.batches:
        run.batches[it] = sample_batch(run.survey.n_s, run.config.batch_size, run.rng)
    batch = run.batches[it]
    job = BatchJob(
        f"gradient-it{it:04d}",
        ArrayJob(len(batch)),
        run.task_runtime,
        run.instance_type,
        run.pricing,
        action=lambda w, index: _gradient_task(w, run, it, index),
    )
    job_id = submit_array_job(world, job)
    run.job_ids[it] = job_id
    run.next_iteration += 1
    logger.info("Iteration %d: submitted %s for shots %s", it, job_id, batch)
    return job_id


def gradient_ready(world: SimWorld, run: LsrtmRun) -> bool:
    """
    True once the updated model of the current iteration exists.

    Raises:
        ProtocolError: If a reducer or update invocation failed
    """
    for trigger in run.triggers:
        if trigger.errors:
            raise ProtocolError(f"reducer on {trigger.queue.name} failed: {trigger.errors[0]}")
    for invocation in run.updater.invocations:
        invocation.raise_for_status()
    return world.store.exists(model_key(run.current + 1))


def count_reached(world: SimWorld, run: LsrtmRun) -> bool:
    if run.next_iteration >= run.config.n_iterations:
        return True
    tol = run.config.gradient_tolerance
    if tol is None:
        return False
    norm = float(world.store.head(model_key(run.current + 1))["grad_norm"])
    if norm < tol:
        logger.info(
            "Stopping after iteration %d of %d: gradient norm %.3e below tolerance %.3e",
            run.current, run.config.n_iterations, norm, tol,
        )
        return True
    return False


def cleanup(world: SimWorld, run: LsrtmRun) -> None:
    for trigger in run.triggers:
        trigger.close()
    for name in run.plan.queue_names(run.queue_prefix):
        world.delete_queue(name)
    run.triggers = []


def lsrtm_bindings(run: LsrtmRun, extra: Optional[Bindings] = None) -> Bindings:
    """Bindings of the operations and predicates ``lsrtm.json`` names."""
    bindings = Bindings(
        resources={
            "create_queues": lambda w: create_queues(w, run),
            "compute_gradient": lambda w: compute_gradient(w, run),
            "cleanup": lambda w: cleanup(w, run),
        },
        predicates={
            "gradient_ready": lambda w: gradient_ready(w, run),
            "count_reached": lambda w: count_reached(w, run),
        },
    )
    if extra is not None:
        bindings.resources.update(extra.resources)
        bindings.predicates.update(extra.predicates)
    return bindings
