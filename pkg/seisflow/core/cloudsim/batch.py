"""
Batch service: array and multi-node jobs on simulated instances.

Each array task gets its own instance. Instances start after a staged
startup delay and are billed from start to termination only; time spent
waiting for capacity is free. A task's modeled runtime is scaled by a
random container jitter, its action runs when it completes (writing
results, sending messages), and its instance is then terminated.
"""
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Union

from seisflow.core.cloudsim.world import EventHandle, SimWorld
from seisflow.core.constants import DEFAULT_INSTANCE_TYPE
from seisflow.core.errors import ArgumentError, ConfigError

# Configure logging
logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class OnDemand:
    """Billed at the instance type's on-demand price."""


@dataclass(frozen=True)
class Spot:
    """Billed at the spot price of ``zone``; may be interrupted."""

    zone: str


Pricing = Union[OnDemand, Spot]


@dataclass(frozen=True)
class ArrayJob:
    """``n`` independent tasks, one instance each."""

    n: int


@dataclass(frozen=True)
class MultiNode:
    """One task spanning ``k`` instances that start together."""

    k: int


JobKind = Union[ArrayJob, MultiNode]
RuntimeModel = Union[float, Sequence[float], Callable[[int], float]]
TaskAction = Callable[[SimWorld, int], None]


@dataclass
class BatchJob:
    """
    Job submitted to the batch service.

    Attributes:
        name: Job name, used in traces and failure plans
        kind: ArrayJob(n) or MultiNode(k)
        runtime: Modeled runtime in seconds, per-task list or callable(index)
        instance_type: Catalog name of the instance type
        pricing: OnDemand() or Spot(zone)
        action: Called with (world, task index) when a task completes
    """

    name: str
    kind: JobKind
    runtime: RuntimeModel
    instance_type: str = DEFAULT_INSTANCE_TYPE
    pricing: Pricing = field(default_factory=OnDemand)
    action: Optional[TaskAction] = field(default=None, repr=False)

    @property
    def n_tasks(self) -> int:
        return self.kind.n if isinstance(self.kind, ArrayJob) else 1

    def task_runtime(self, index: int) -> float:
        if callable(self.runtime):
            value = self.runtime(index)
        elif isinstance(self.runtime, (int, float)):
            value = self.runtime
        else:
            value = self.runtime[index]
        value = float(value)
        if value < 0:
            raise ArgumentError(f"task {index} of {self.name} has negative runtime {value}")
        return value


@dataclass
class Instance:
    """One simulated machine."""

    id: str
    job_id: str
    task_index: int
    attempt: int
    instance_type: str
    pricing: Pricing
    requested_at: float
    start: Optional[float] = None
    end: Optional[float] = None
    state: str = "pending"
    cost: float = 0.0
    completion: Optional[EventHandle] = field(default=None, repr=False)


@dataclass
class TaskRecord:
    """Timeline of one task across its attempts."""

    index: int
    runtime: float
    attempts: int = 0
    start: Optional[float] = None
    end: Optional[float] = None
    state: str = "pending"
    instance_ids: List[str] = field(default_factory=list)


@dataclass
class JobRecord:
    """State of a submitted job."""

    id: str
    job: BatchJob
    submitted_at: float
    tasks: List[TaskRecord] = field(default_factory=list)
    on_complete: Optional[Callable[["JobRecord"], None]] = field(default=None, repr=False)

    @property
    def done(self) -> bool:
        return all(t.state in ("succeeded", "failed") for t in self.tasks)

    @property
    def succeeded(self) -> int:
        return sum(1 for t in self.tasks if t.state == "succeeded")

    @property
    def failed(self) -> int:
        return sum(1 for t in self.tasks if t.state == "failed")

    @property
    def completed_at(self) -> Optional[float]:
        if not self.done:
            return None
        ends = [t.end for t in self.tasks if t.end is not None]
        return max(ends) if ends else self.submitted_at


def instance_price(world: SimWorld, instance: Instance, t0: float, t1: float) -> float:
    """Cost in $ of ``instance`` running from t0 to t1."""
    itype = world.instance_type(instance.instance_type)
    if isinstance(instance.pricing, Spot):
        key = (instance.pricing.zone, instance.instance_type)
        if key in world.market:
            return world.market.get(*key).integrate(t0, t1)
        return itype.spot_price * (t1 - t0) / 3600.0
    return itype.on_demand_price * (t1 - t0) / 3600.0


def _terminate(world: SimWorld, instance: Instance, state: str) -> None:
    instance.end = world.clock
    instance.state = state
    if instance.start is None:
        return
    instance.cost = instance_price(world, instance, instance.start, instance.end)
    world.charge("instance", instance.id, instance.cost, instance.end - instance.start)


def _validate(world: SimWorld, job: BatchJob) -> None:
    world.instance_type(job.instance_type)
    if isinstance(job.kind, ArrayJob):
        if job.kind.n < 1:
            raise ArgumentError(f"array job {job.name} needs at least one task")
    elif isinstance(job.kind, MultiNode):
        if job.kind.k < 1:
            raise ArgumentError(f"multi-node job {job.name} needs at least one node")
        if isinstance(job.pricing, Spot):
            raise ConfigError("multi-node jobs only run on on-demand instances")
    else:
        raise ConfigError(f"unknown job kind {job.kind!r}")
    if isinstance(job.pricing, Spot) and job.pricing.zone == "":
        raise ConfigError("spot pricing needs a zone")


def submit_array_job(
    world: SimWorld,
    job: BatchJob,
    on_complete: Optional[Callable[[JobRecord], None]] = None,
) -> str:
    """
    Submit a job to the batch service.

    Args:
        world: The simulation world
        job: Array or multi-node job
        on_complete: Called with the job record once every task finished

    Returns:
        Job id

    Raises:
        ConfigError: Unknown instance type, or multi-node with spot pricing
        ArgumentError: Empty job
    """
    _validate(world, job)
    record = JobRecord(world.next_id("job"), job, world.clock, on_complete=on_complete)
    world.jobs[record.id] = record
    if isinstance(job.kind, MultiNode):
        _launch_multi_node(world, record)
    else:
        for index in range(job.kind.n):
            task = TaskRecord(index, job.task_runtime(index))
            record.tasks.append(task)
            _launch_attempt(world, record, task, delay=world.sample_startup())
    logger.info(
        "Submitted %s %s (%s) with %d tasks on %s",
        record.id,
        job.name,
        type(job.kind).__name__,
        job.n_tasks,
        job.instance_type,
    )
    return record.id


def _launch_attempt(world: SimWorld, record: JobRecord, task: TaskRecord, delay: float) -> None:
    job = record.job
    task.attempts += 1
    task.state = "starting"
    instance = Instance(
        world.next_id("i"),
        record.id,
        task.index,
        task.attempts,
        job.instance_type,
        job.pricing,
        world.clock,
    )
    world.instances[instance.id] = instance
    task.instance_ids.append(instance.id)
    world.schedule(delay, lambda: _start_task(world, record, task, instance), f"start:{instance.id}")


def _start_task(world: SimWorld, record: JobRecord, task: TaskRecord, instance: Instance) -> None:
    if instance.state != "pending":
        return
    instance.start = world.clock
    instance.state = "running"
    task.state = "running"
    if task.start is None:
        task.start = world.clock
    runtime = task.runtime * world.sample_jitter()
    instance.completion = world.schedule(
        runtime, lambda: _complete_task(world, record, task, instance), f"complete:{instance.id}"
    )
    if task.attempts == 1:
        share = world.failure_plan.resolve(record.job.name, task.index, world.rng)
        if share is not None:
            world.schedule(
                share * runtime,
                lambda: inject_interruption(world, instance.id, world.clock),
                f"interrupt:{instance.id}",
            )


def _complete_task(world: SimWorld, record: JobRecord, task: TaskRecord, instance: Instance) -> None:
    if record.job.action is not None:
        record.job.action(world, task.index)
    _terminate(world, instance, "terminated")
    task.end = world.clock
    task.state = "succeeded"
    logger.debug("%s task %d finished at %.1f s", record.id, task.index, world.clock)
    _check_job_done(world, record)


def _check_job_done(world: SimWorld, record: JobRecord) -> None:
    if record.done and record.on_complete is not None:
        callback, record.on_complete = record.on_complete, None
        callback(record)


def inject_interruption(world: SimWorld, instance_id: str, t: Optional[float] = None) -> None:
    """
    Interrupt an instance at time ``t`` (now when omitted).

    The task running on the instance is killed; billing stops at the
    interruption. With the world's failure plan allowing restarts, the task
    is relaunched from scratch after the restart penalty.

    Raises:
        ArgumentError: Unknown instance or a time in the past
    """
    if instance_id not in world.instances:
        raise ArgumentError(f"unknown instance {instance_id!r}")
    t = world.clock if t is None else float(t)
    if t > world.clock:
        world.schedule_at(t, lambda: inject_interruption(world, instance_id), f"interrupt:{instance_id}")
        return
    if t < world.clock:
        raise ArgumentError(f"interruption time {t} lies before the clock {world.clock}")

    instance = world.instances[instance_id]
    if instance.state not in ("pending", "running"):
        return
    record = world.jobs[instance.job_id]
    warning_at = max(world.clock - world.config.spot_warning, instance.start or world.clock)
    world.record(f"warning:{instance.id}@{warning_at:.3f}")
    if instance.completion is not None:
        instance.completion.cancel()
    _terminate(world, instance, "interrupted")
    world.record(f"interrupted:{instance.id}")
    logger.warning("Instance %s interrupted at %.1f s", instance.id, world.clock)

    if isinstance(record.job.kind, MultiNode):
        for task in record.tasks:
            task.state = "failed"
            task.end = world.clock
        for other_id in record_instances(world, record):
            other = world.instances[other_id]
            if other.state in ("pending", "running"):
                if other.completion is not None:
                    other.completion.cancel()
                _terminate(world, other, "interrupted")
        _check_job_done(world, record)
        return

    task = record.tasks[instance.task_index]
    if world.failure_plan.restart:
        _launch_attempt(world, record, task, delay=world.config.restart_penalty)
    else:
        task.state = "failed"
        task.end = world.clock
        _check_job_done(world, record)


def record_instances(world: SimWorld, record: JobRecord) -> List[str]:
    return [i.id for i in world.instances.values() if i.job_id == record.id]


def _launch_multi_node(world: SimWorld, record: JobRecord) -> None:
    job = record.job
    k = job.kind.k  # type: ignore[union-attr]
    task = TaskRecord(0, job.task_runtime(0), attempts=1, state="starting")
    record.tasks.append(task)
    nodes: List[Instance] = []
    ready: Dict[str, bool] = {}

    def node_up(instance: Instance) -> None:
        if instance.state != "pending":
            return
        instance.start = world.clock
        instance.state = "running"
        ready[instance.id] = True
        if len(ready) == k:
            _start_multi_node(world, record, task, nodes)

    for _ in range(k):
        instance = Instance(
            world.next_id("i"), record.id, 0, 1, job.instance_type, job.pricing, world.clock
        )
        world.instances[instance.id] = instance
        task.instance_ids.append(instance.id)
        nodes.append(instance)
        world.schedule(
            world.sample_startup(), lambda inst=instance: node_up(inst), f"start:{instance.id}"
        )


def _start_multi_node(
    world: SimWorld, record: JobRecord, task: TaskRecord, nodes: List[Instance]
) -> None:
    task.state = "running"
    task.start = world.clock
    runtime = task.runtime * world.sample_jitter()

    def complete() -> None:
        if record.job.action is not None:
            record.job.action(world, 0)
        for node in nodes:
            _terminate(world, node, "terminated")
        task.end = world.clock
        task.state = "succeeded"
        _check_job_done(world, record)

    handle = world.schedule(runtime, complete, f"complete:{record.id}")
    for node in nodes:
        node.completion = handle
