"""
Inversion backends.

Both backends keep the optimization variable in float32, draw batches from
``default_rng(seed)`` and sum shot gradients in the binary pairing order of
:func:`tree_sum`, so their iterates agree bit for bit.
"""
import logging
import time
from functools import partial
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np

from seisflow.core.cloudsim.scenario import Scenario
from seisflow.core.constants import MAX_OBJECT_ELEMS
from seisflow.core.errors import BackendError, SeisflowError, WorkflowExecutionError
from seisflow.core.flow.definition import WorkflowDefinition, bundled_workflow, load_workflow
from seisflow.core.flow.executor import ExecutionTrace, execute
from seisflow.core.flow.lsrtm import GRADIENT_TASK_RUNTIME_S, LsrtmRun, TaskRuntime, lsrtm_bindings
from seisflow.core.hooks import CallbackRegistry, LifecycleEvent
from seisflow.core.imaging.interfaces import InversionBackend
from seisflow.core.imaging.objective import ImagingOptions, evaluate_shot
from seisflow.core.imaging.optimizer import sample_batch, sgd_step
from seisflow.core.imaging.survey import InversionConfig, InversionHistory, IterationRecord, Survey
from seisflow.core.reducer.chunking import model_key
from seisflow.core.reducer.tree import tree_sum
from seisflow.core.utils.async_bridge import AsyncBridge, map_in_executor
from seisflow.core.wavekit.grid import ShotRecord, VelocityModel

# Configure logging
logger = logging.getLogger(__name__)


def batch_gradient(
    model: VelocityModel,
    shots: List[ShotRecord],
    options: ImagingOptions,
    max_workers: int = 1,
) -> Tuple[float, np.ndarray]:
    """
    Summed misfit and float32 gradient of a batch.

    Shots are evaluated on a thread pool; misfits are added in batch order
    and gradients with :func:`tree_sum`.
    """
    results = AsyncBridge.run_async(
        map_in_executor, partial(evaluate_shot, model, options=options), shots, max_workers
    )
    phi = 0.0
    for value, _ in results:
        phi += value
    return phi, tree_sum([np.asarray(g, dtype=np.float32) for _, g in results])


class InProcessBackend(InversionBackend):
    """
    Runs every iteration in this process.

    Args:
        max_workers: Shots evaluated concurrently
        callback_registry: Registry for callback hooks
    """

    name = "in-process"

    def __init__(self, max_workers: int = 1, callback_registry: Optional[CallbackRegistry] = None):
        super().__init__(callback_registry)
        self.max_workers = max(1, int(max_workers))

    def run(
        self, survey: Survey, config: InversionConfig, step_size: float
    ) -> Tuple[VelocityModel, InversionHistory]:
        initial = config.initial_model
        x = initial.slowness_sq.astype(np.float32)
        rng = np.random.default_rng(config.seed)
        history = InversionHistory(step_size)

        for it in range(config.n_iterations):
            start = time.perf_counter()
            batch = sample_batch(survey.n_s, config.batch_size, rng)
            self.trigger_callback(LifecycleEvent.BEFORE_ITERATION, {"iteration": it, "shots": batch})
            try:
                model = initial.with_slowness(x.astype(np.float64))
                phi, g = batch_gradient(
                    model, [survey.shots[i] for i in batch], config.options, self.max_workers
                )
                self.trigger_callback(
                    LifecycleEvent.GRADIENTS_COMPUTED, {"iteration": it, "misfit": phi, "gradient": g}
                )
                x = sgd_step(x, g, step_size)
            except SeisflowError as e:
                raise BackendError(it, e) from e

            grad_norm = float(np.linalg.norm(g.astype(np.float64)))
            record = IterationRecord(it, batch, phi, grad_norm, time.perf_counter() - start)
            history.append(record)
            logger.info("Iteration %d: misfit %.6e, |g| %.3e (%.1f s)", it, phi, grad_norm, record.wall_s)
            self.trigger_callback(LifecycleEvent.AFTER_ITERATION, {"iteration": it, "record": record})

            tol = config.gradient_tolerance
            if tol is not None and grad_norm < tol:
                logger.info(
                    "Stopping after iteration %d of %d: gradient norm %.3e below tolerance %.3e",
                    it, config.n_iterations, grad_norm, tol,
                )
                break

        return initial.with_slowness(x.astype(np.float64)), history


class SimulatedBackend(InversionBackend):
    """
    Runs the LS-RTM workflow on a simulated cloud.

    Gradients are computed by array jobs, summed by queue-triggered
    functions and applied by the update function; the wall time of an
    iteration is simulated time between consecutive model writes.

    Args:
        scenario: Simulated world to build (default scenario when None)
        workflow: Workflow definition or path (bundled ``lsrtm.json`` when None)
        deterministic: Reduce in the binary pairing order
        max_object_elems: Largest gradient chunk
        n_queues: Reduction queues
        task_runtime: Modeled runtime of a gradient task
        callback_registry: Registry for callback hooks
    """

    name = "simulated"

    def __init__(
        self,
        scenario: Optional[Scenario] = None,
        workflow: Optional[Union[WorkflowDefinition, str, Path]] = None,
        deterministic: bool = True,
        max_object_elems: Optional[int] = None,
        n_queues: int = 1,
        task_runtime: TaskRuntime = GRADIENT_TASK_RUNTIME_S,
        callback_registry: Optional[CallbackRegistry] = None,
    ):
        super().__init__(callback_registry)
        self.scenario = scenario or Scenario()
        if workflow is None:
            workflow = bundled_workflow()[1]
        elif not isinstance(workflow, WorkflowDefinition):
            workflow = load_workflow(workflow)
        self.workflow = workflow
        self.deterministic = deterministic
        self.max_object_elems = max_object_elems or MAX_OBJECT_ELEMS
        self.n_queues = n_queues
        self.task_runtime = task_runtime
        self.last_world = None
        self.last_trace: Optional[ExecutionTrace] = None
        self.last_run: Optional[LsrtmRun] = None

    def run(
        self, survey: Survey, config: InversionConfig, step_size: float
    ) -> Tuple[VelocityModel, InversionHistory]:
        world = self.scenario.build_world()
        run = LsrtmRun(
            survey,
            config,
            step_size,
            deterministic=self.deterministic,
            max_object_elems=self.max_object_elems,
            n_queues=self.n_queues,
            task_runtime=self.task_runtime,
        )
        self.last_world, self.last_run = world, run
        try:
            _, trace = execute(self.workflow, lsrtm_bindings(run), world, self._callback_registry)
        except WorkflowExecutionError as e:
            self.last_trace = e.trace
            raise BackendError(max(run.current, 0), e) from e
        self.last_trace = trace

        history = InversionHistory(step_size)
        for record in run.records(world):
            history.append(record)
            self.trigger_callback(LifecycleEvent.AFTER_ITERATION, {"iteration": record.iteration, "record": record})
        x = world.store.get_array(model_key(len(history)))
        logger.info(
            "Workflow ran %d iterations in %.1f simulated s for $%.4f",
            len(history),
            trace.duration,
            world.total_cost(),
        )
        return config.initial_model.with_slowness(x.astype(np.float64)), history
