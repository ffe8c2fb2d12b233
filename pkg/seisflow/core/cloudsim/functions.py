"""
Capped function runtime.

Functions are modeled after a serverless runtime with a memory cap and a
duration cap. A handler declares how long an invocation takes for a batch
of messages; its effects are applied when the invocation completes on the
simulation clock. Billing accrues per request and per GB-second.
"""
import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any, List, Optional

from seisflow.core.errors import (
    ConfigError,
    FunctionTimeoutError,
    SeisflowError,
    SimulationError,
)

if TYPE_CHECKING:
    from seisflow.core.cloudsim.queue import MessageQueue, QueueMessage
    from seisflow.core.cloudsim.world import SimWorld

# Configure logging
logger = logging.getLogger(__name__)


class FunctionHandler(ABC):
    """Interface for functions invoked with a batch of queue messages."""

    name: str = "function"

    @abstractmethod
    def modeled_duration(self, world: "SimWorld", messages: List["QueueMessage"]) -> float:
        """
        Simulated execution time of one invocation.

        Args:
            world: The simulation world
            messages: Messages passed to the invocation

        Returns:
            Duration in seconds
        """

    @abstractmethod
    def handle(
        self,
        world: "SimWorld",
        messages: List["QueueMessage"],
        queue: Optional["MessageQueue"],
    ) -> Any:
        """
        Apply the invocation's effects; runs at completion time.

        Args:
            world: The simulation world
            messages: Messages passed to the invocation
            queue: Queue the messages came from, if any

        Returns:
            Handler-specific result stored on the invocation record
        """


@dataclass
class Invocation:
    """Record of one function invocation."""

    id: str
    handler: str
    memory_gb: float
    start: float
    n_messages: int
    duration: float = 0.0
    end: Optional[float] = None
    status: str = "running"
    result: Any = None
    error: Optional[BaseException] = field(default=None, repr=False)

    @property
    def done(self) -> bool:
        return self.status != "running"

    def raise_for_status(self) -> None:
        if self.error is not None:
            raise self.error


def function_cost(world: "SimWorld", memory_gb: float, duration_s: float) -> float:
    """Request fee plus GB-seconds at the world's rates."""
    cfg = world.config
    return cfg.request_fee + memory_gb * duration_s * cfg.gb_second_fee


def invoke_function(
    world: "SimWorld",
    handler: FunctionHandler,
    memory_gb: float,
    messages: Optional[List["QueueMessage"]] = None,
    queue: Optional["MessageQueue"] = None,
) -> Invocation:
    """
    Start a function invocation.

    Args:
        world: The simulation world
        handler: Function to run
        memory_gb: Memory configured for the function
        messages: Messages passed to the invocation
        queue: Queue the messages came from

    Returns:
        Invocation record, completed when the world reaches its end time

    Raises:
        ConfigError: If the memory request exceeds the runtime cap
    """
    cfg = world.config
    if memory_gb <= 0 or memory_gb > cfg.function_memory_cap_gb:
        raise ConfigError(
            f"memory {memory_gb} GB outside (0, {cfg.function_memory_cap_gb}] GB"
        )
    messages = list(messages or [])
    duration = float(handler.modeled_duration(world, messages))
    if duration < 0:
        raise SimulationError(f"{handler.name} reported a negative duration")

    invocation = Invocation(
        world.next_id("fn"), handler.name, memory_gb, world.clock, len(messages), duration
    )
    world.invocations.append(invocation)
    cap = cfg.function_duration_cap_s

    def finish_timeout() -> None:
        invocation.end = world.clock
        invocation.status = "timeout"
        invocation.error = FunctionTimeoutError(duration, cap)
        world.charge("function", handler.name, function_cost(world, memory_gb, cap), memory_gb * cap)
        logger.warning(
            "%s %s timed out after %.0f s; %d messages will be redelivered",
            handler.name,
            invocation.id,
            cap,
            len(messages),
        )

    def finish() -> None:
        invocation.end = world.clock
        world.charge(
            "function", handler.name, function_cost(world, memory_gb, duration), memory_gb * duration
        )
        try:
            invocation.result = handler.handle(world, messages, queue)
            invocation.status = "ok"
        except SeisflowError as e:
            invocation.status = "error"
            invocation.error = e
            logger.error("%s %s failed: %s", handler.name, invocation.id, e, exc_info=True)

    if duration > cap:
        world.schedule(cap, finish_timeout, f"{handler.name}:timeout:{invocation.id}")
    else:
        world.schedule(duration, finish, f"{handler.name}:done:{invocation.id}")
    return invocation
