"""
Discrete-event simulation world.

A SimWorld owns the simulation clock, a heap of pending events ordered by
(time, insertion sequence), the object store, the message queues, the
instances launched by the batch service and an accounting ledger. All
randomness comes from one numpy Generator seeded at construction, so the
same seed and the same sequence of calls give identical event traces.
"""
import heapq
import itertools
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from seisflow.core.cloudsim.catalog import InstanceType, SpotMarket, default_catalog
from seisflow.core.cloudsim.queue import MessageQueue
from seisflow.core.cloudsim.storage import ObjectStore
from seisflow.core.constants import (
    DUPLICATION_PROBABILITY,
    FUNCTION_DURATION_CAP_S,
    FUNCTION_GB_SECOND_FEE,
    FUNCTION_MEMORY_CAP_GB,
    FUNCTION_REQUEST_FEE,
    MAX_EVENTS,
    POLL_INTERVAL_S,
    RECEIVE_SINGLE_BIAS,
    RESTART_PENALTY_S,
    RUNTIME_JITTER,
    SPOT_WARNING_S,
    STARTUP_WINDOW_S,
    STORE_BANDWIDTH_MB_S,
    STORE_LATENCY_S,
    VISIBILITY_TIMEOUT_S,
)
from seisflow.core.errors import ArgumentError, ConfigError, SimulationError

# Configure logging
logger = logging.getLogger(__name__)

Seed = Union[int, Sequence[int]]


@dataclass
class SimConfig:
    """Tunable behavior of the simulated cloud services."""

    startup_window: Tuple[float, float] = STARTUP_WINDOW_S
    runtime_jitter: float = RUNTIME_JITTER
    restart_penalty: float = RESTART_PENALTY_S
    spot_warning: float = SPOT_WARNING_S
    visibility_timeout: float = VISIBILITY_TIMEOUT_S
    duplication_probability: float = DUPLICATION_PROBABILITY
    receive_single_bias: float = RECEIVE_SINGLE_BIAS
    return_delay: float = POLL_INTERVAL_S
    function_memory_cap_gb: float = FUNCTION_MEMORY_CAP_GB
    function_duration_cap_s: float = FUNCTION_DURATION_CAP_S
    request_fee: float = FUNCTION_REQUEST_FEE
    gb_second_fee: float = FUNCTION_GB_SECOND_FEE
    store_bandwidth_mb_s: float = STORE_BANDWIDTH_MB_S
    store_latency_s: float = STORE_LATENCY_S
    max_events: int = MAX_EVENTS

    def __post_init__(self):
        lo, hi = self.startup_window
        if lo < 0 or hi < lo:
            raise ConfigError(f"invalid startup window {self.startup_window}")
        self.startup_window = (float(lo), float(hi))
        if self.runtime_jitter < 0:
            raise ConfigError("runtime_jitter must be non-negative")
        if not 0.0 <= self.duplication_probability <= 1.0:
            raise ConfigError("duplication_probability must lie in [0, 1]")
        if not 0.0 < self.receive_single_bias <= 1.0:
            raise ConfigError("receive_single_bias must lie in (0, 1]")
        if self.visibility_timeout <= 0 or self.return_delay < 0:
            raise ConfigError("visibility_timeout must be positive and return_delay non-negative")
        if self.restart_penalty < 0:
            raise ConfigError("restart_penalty must be non-negative")


@dataclass
class FailurePlan:
    """
    Interruptions applied to batch tasks when they launch.

    Attributes:
        interruptions: (job name, task index) -> fraction of the task runtime
            after which its first attempt is interrupted
        fraction: Probability that any other task's first attempt is
            interrupted at a uniformly drawn point of its runtime
        restart: Whether interrupted tasks are relaunched
    """

    interruptions: Dict[Tuple[str, int], float] = field(default_factory=dict)
    fraction: float = 0.0
    restart: bool = True

    def __post_init__(self):
        if not 0.0 <= self.fraction <= 1.0:
            raise ConfigError("failure fraction must lie in [0, 1]")
        for key, share in self.interruptions.items():
            if not 0.0 <= share <= 1.0:
                raise ConfigError(f"interruption point for {key} must lie in [0, 1]")

    def resolve(self, job_name: str, index: int, rng: np.random.Generator) -> Optional[float]:
        """Fraction of runtime at which a first attempt fails, or None."""
        if (job_name, index) in self.interruptions:
            return self.interruptions[(job_name, index)]
        if self.fraction > 0.0 and rng.random() < self.fraction:
            return float(rng.random())
        return None


class TraceEntry(NamedTuple):
    time: float
    seq: int
    label: str


class LedgerEntry(NamedTuple):
    time: float
    category: str
    resource: str
    amount: float
    quantity: float


class EventHandle:
    """Reference to a scheduled event; cancelling it skips the action."""

    __slots__ = ("time", "seq", "label", "action", "cancelled")

    def __init__(self, time: float, seq: int, label: str, action: Callable[[], Any]):
        self.time = time
        self.seq = seq
        self.label = label
        self.action = action
        self.cancelled = False

    def __lt__(self, other: "EventHandle") -> bool:
        return (self.time, self.seq) < (other.time, other.seq)

    def cancel(self) -> None:
        self.cancelled = True


class SimWorld:
    """
    Deterministic discrete-event world.

    Args:
        seed: Seed (or seed sequence) of the world's random generator
        config: Service behavior
        catalog: Instance types by name (default catalog when omitted)
        market: Spot price series; types without a series use their
            reference spot price
        failure_plan: Interruptions resolved when batch tasks launch
    """

    def __init__(
        self,
        seed: Seed = 0,
        config: Optional[SimConfig] = None,
        catalog: Optional[Dict[str, InstanceType]] = None,
        market: Optional[SpotMarket] = None,
        failure_plan: Optional[FailurePlan] = None,
    ):
        self.seed = seed
        self.config = config or SimConfig()
        self.catalog = catalog if catalog is not None else default_catalog()
        self.market = market if market is not None else SpotMarket()
        self.failure_plan = failure_plan or FailurePlan()
        self.rng = np.random.default_rng(seed)
        self.clock = 0.0
        self.store = ObjectStore(clock=lambda: self.clock)
        self.queues: Dict[str, MessageQueue] = {}
        self.instances: Dict[str, Any] = {}
        self.jobs: Dict[str, Any] = {}
        self.invocations: List[Any] = []
        self.trace: List[TraceEntry] = []
        self.ledger: List[LedgerEntry] = []
        self.events_processed = 0
        self._heap: List[EventHandle] = []
        self._seq = itertools.count()
        self._ids: Dict[str, itertools.count] = {}

    def __repr__(self) -> str:
        return f"SimWorld(seed={self.seed!r}, clock={self.clock:.3f}, pending={self.pending})"

    # Scheduling

    @property
    def pending(self) -> int:
        return sum(1 for ev in self._heap if not ev.cancelled)

    def next_id(self, prefix: str) -> str:
        """Sequential identifier such as ``i-000003``."""
        counter = self._ids.setdefault(prefix, itertools.count())
        return f"{prefix}-{next(counter):06d}"

    def schedule_at(self, time: float, action: Callable[[], Any], label: str) -> EventHandle:
        """
        Schedule ``action`` at absolute simulation time ``time``.

        Raises:
            SimulationError: If ``time`` lies in the past
        """
        if time < self.clock:
            raise SimulationError(f"cannot schedule {label!r} at {time} before clock {self.clock}")
        handle = EventHandle(float(time), next(self._seq), label, action)
        heapq.heappush(self._heap, handle)
        return handle

    def schedule(self, delay: float, action: Callable[[], Any], label: str) -> EventHandle:
        """Schedule ``action`` ``delay`` seconds from now."""
        if delay < 0:
            raise SimulationError(f"negative delay {delay} for {label!r}")
        return self.schedule_at(self.clock + delay, action, label)

    def record(self, label: str) -> None:
        """Append an annotation to the event trace at the current time."""
        self.trace.append(TraceEntry(self.clock, -1, label))

    def _step(self) -> bool:
        while self._heap:
            event = heapq.heappop(self._heap)
            if event.cancelled:
                continue
            self.clock = event.time
            self.events_processed += 1
            self.trace.append(TraceEntry(event.time, event.seq, event.label))
            event.action()
            return True
        return False

    def _next_time(self) -> Optional[float]:
        while self._heap and self._heap[0].cancelled:
            heapq.heappop(self._heap)
        return self._heap[0].time if self._heap else None

    def run_until_idle(self, max_events: Optional[int] = None) -> float:
        """
        Process events until none are pending.

        Args:
            max_events: Livelock guard (default from the world config)

        Returns:
            Final clock

        Raises:
            SimulationError: If more than ``max_events`` events are processed
        """
        limit = max_events if max_events is not None else self.config.max_events
        processed = 0
        while self._step():
            processed += 1
            if processed > limit:
                raise SimulationError(
                    f"event cap of {limit} exceeded at t={self.clock:.3f}; possible livelock"
                )
        return self.clock

    def run_until(self, time: float, max_events: Optional[int] = None) -> float:
        """
        Process every event scheduled at or before ``time``, then set the clock to it.

        Raises:
            ArgumentError: If ``time`` lies before the clock
            SimulationError: If the event cap is exceeded
        """
        if time < self.clock:
            raise ArgumentError(f"cannot run back to {time} from {self.clock}")
        limit = max_events if max_events is not None else self.config.max_events
        processed = 0
        while True:
            nxt = self._next_time()
            if nxt is None or nxt > time:
                break
            self._step()
            processed += 1
            if processed > limit:
                raise SimulationError(f"event cap of {limit} exceeded before t={time}")
        self.clock = float(time)
        return self.clock

    # Randomness shared by the services

    def sample_startup(self) -> float:
        lo, hi = self.config.startup_window
        return float(self.rng.uniform(lo, hi))

    def sample_jitter(self) -> float:
        return float(self.rng.uniform(1.0, 1.0 + self.config.runtime_jitter))

    def random_tag(self) -> str:
        return f"{int(self.rng.integers(0, 2**32)):08x}"

    # Accounting

    def charge(self, category: str, resource: str, amount: float, quantity: float = 0.0) -> None:
        """
        Add a ledger entry.

        Raises:
            SimulationError: If the amount or quantity is negative
        """
        if amount < 0 or quantity < 0:
            raise SimulationError(f"negative charge {amount} for {resource}")
        self.ledger.append(LedgerEntry(self.clock, category, resource, float(amount), float(quantity)))

    def total_cost(self, category: Optional[str] = None) -> float:
        return float(
            sum(e.amount for e in self.ledger if category is None or e.category == category)
        )

    def ledger_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.ledger, columns=list(LedgerEntry._fields))

    def trace_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.trace, columns=list(TraceEntry._fields))

    def write_ledger(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.ledger_frame().to_csv(path, index=False, float_format="%.10g")
        return path

    # Queues

    def create_queue(self, name: str, visibility_timeout: Optional[float] = None) -> MessageQueue:
        """Create (or return the existing) queue ``name``."""
        if name not in self.queues:
            self.queues[name] = MessageQueue(self, name, visibility_timeout)
            logger.debug("Created queue %s", name)
        return self.queues[name]

    def get_queue(self, name: str) -> MessageQueue:
        try:
            return self.queues[name]
        except KeyError as e:
            raise ArgumentError(f"unknown queue {name!r}") from e

    def delete_queue(self, name: str) -> bool:
        queue = self.queues.pop(name, None)
        if queue is None:
            return False
        queue.close()
        logger.debug("Deleted queue %s", name)
        return True

    def instance_type(self, name: str) -> InstanceType:
        try:
            return self.catalog[name]
        except KeyError as e:
            raise ConfigError(f"unknown instance type {name!r}") from e
