"""
At-least-once message queue and queue-triggered functions.

Received messages stay hidden for a visibility timeout and reappear unless
they are deleted first. The number of messages a receive returns is drawn
from a truncated geometric distribution that favors single messages, and
which visible messages are returned is drawn uniformly. A duplication
probability keeps a copy of a deleted message around, to be delivered once
more after the visibility timeout.
"""
import json
import logging
from dataclasses import dataclass, replace
from typing import TYPE_CHECKING, Any, Dict, List, Optional

import numpy as np

from seisflow.core.cloudsim.functions import FunctionHandler, Invocation, invoke_function
from seisflow.core.constants import MAX_RECEIVE_MESSAGES
from seisflow.core.errors import ArgumentError

if TYPE_CHECKING:
    from seisflow.core.cloudsim.world import EventHandle, SimWorld

# Configure logging
logger = logging.getLogger(__name__)


@dataclass
class QueueMessage:
    """A message as seen by a consumer."""

    id: str
    body: Dict[str, Any]
    seq: int
    sent_at: float
    visible_at: float
    receive_count: int = 0
    receipt: Optional[str] = None
    duplicate: bool = False


class MessageQueue:
    """
    Simulated queue with visibility timeouts.

    Args:
        world: Owning world (clock, rng, scheduling)
        name: Queue name
        visibility_timeout: Default hide interval after a receive
    """

    def __init__(self, world: "SimWorld", name: str, visibility_timeout: Optional[float] = None):
        self.world = world
        self.name = name
        self.visibility_timeout = (
            visibility_timeout if visibility_timeout is not None else world.config.visibility_timeout
        )
        self._messages: Dict[str, QueueMessage] = {}
        self._seq = 0
        self._triggers: List["QueueTrigger"] = []
        self.sent = 0
        self.deliveries = 0
        self.deleted = 0
        self.duplicated = 0

    def __repr__(self) -> str:
        return f"MessageQueue({self.name!r}, depth={self.depth})"

    @property
    def depth(self) -> int:
        """Messages held by the queue, visible or in flight."""
        return len(self._messages)

    @property
    def visible_count(self) -> int:
        now = self.world.clock
        return sum(1 for m in self._messages.values() if m.visible_at <= now)

    @property
    def in_flight(self) -> int:
        return self.depth - self.visible_count

    def messages(self) -> List[QueueMessage]:
        """Snapshot of every held message in send order."""
        return [replace(m) for m in sorted(self._messages.values(), key=lambda m: m.seq)]

    def _enqueue(self, body: Dict[str, Any], delay: float, duplicate: bool = False) -> QueueMessage:
        message = QueueMessage(
            id=self.world.next_id("msg"),
            body=body,
            seq=self._seq,
            sent_at=self.world.clock,
            visible_at=self.world.clock + delay,
            duplicate=duplicate,
        )
        self._seq += 1
        self._messages[message.id] = message
        self._notify(message.visible_at)
        return message

    def send(self, body: Dict[str, Any], delay: float = 0.0) -> QueueMessage:
        """
        Enqueue a JSON-serializable body.

        Returns:
            The stored message
        """
        if delay < 0:
            raise ArgumentError("delay must be non-negative")
        body = json.loads(json.dumps(body))
        self.sent += 1
        return replace(self._enqueue(body, delay))

    def _sample_count(self, max_n: int, n_visible: int) -> int:
        n = min(max_n, n_visible)
        if n <= 1:
            return n
        p = self.world.config.receive_single_bias
        weights = p * (1.0 - p) ** np.arange(n)
        return int(self.world.rng.choice(n, p=weights / weights.sum())) + 1

    def receive(
        self, max_n: int = MAX_RECEIVE_MESSAGES, visibility_timeout: Optional[float] = None
    ) -> List[QueueMessage]:
        """
        Receive up to ``max_n`` visible messages and hide them.

        Args:
            max_n: Upper bound on the batch size, 1 to 10
            visibility_timeout: Hide interval (queue default when omitted)

        Returns:
            Received messages in send order, possibly empty

        Raises:
            ArgumentError: If max_n lies outside [1, 10]
        """
        if not 1 <= max_n <= MAX_RECEIVE_MESSAGES:
            raise ArgumentError(f"max_n must lie in [1, {MAX_RECEIVE_MESSAGES}], got {max_n}")
        timeout = visibility_timeout if visibility_timeout is not None else self.visibility_timeout
        now = self.world.clock
        visible = sorted(
            (m for m in self._messages.values() if m.visible_at <= now), key=lambda m: m.seq
        )
        count = self._sample_count(max_n, len(visible))
        if count == 0:
            return []
        if count < len(visible):
            picked = sorted(self.world.rng.choice(len(visible), size=count, replace=False))
            batch = [visible[i] for i in picked]
        else:
            batch = visible
        received = []
        for message in batch:
            message.receive_count += 1
            message.receipt = f"{message.id}#{message.receive_count}"
            message.visible_at = now + timeout
            received.append(replace(message))
        self.deliveries += len(received)
        self._notify(now + timeout)
        logger.debug("%s: received %d of %d visible", self.name, len(received), len(visible))
        return received

    def _current(self, message: QueueMessage) -> Optional[QueueMessage]:
        held = self._messages.get(message.id)
        if held is None or held.receipt != message.receipt:
            return None
        return held

    def delete(self, message: QueueMessage) -> bool:
        """
        Delete a received message.

        Returns:
            False when the receipt is stale (the message was redelivered or
            already deleted)
        """
        held = self._current(message)
        if held is None:
            return False
        del self._messages[held.id]
        self.deleted += 1
        p = self.world.config.duplication_probability
        if p > 0.0 and self.world.rng.random() < p:
            self.duplicated += 1
            self._enqueue(dict(held.body), self.visibility_timeout, duplicate=True)
            logger.debug("%s: duplicate of %s scheduled", self.name, held.id)
        return True

    def return_message(self, message: QueueMessage, delay: Optional[float] = None) -> bool:
        """
        Make a received message visible again after ``delay`` seconds.

        Returns:
            False when the receipt is stale
        """
        held = self._current(message)
        if held is None:
            return False
        wait = delay if delay is not None else self.world.config.return_delay
        held.visible_at = self.world.clock + wait
        self._notify(held.visible_at)
        return True

    def attach(self, trigger: "QueueTrigger") -> None:
        self._triggers.append(trigger)
        if self.visible_count:
            trigger.wake_at(self.world.clock)

    def detach(self, trigger: "QueueTrigger") -> None:
        if trigger in self._triggers:
            self._triggers.remove(trigger)

    def _notify(self, time: float) -> None:
        for trigger in self._triggers:
            trigger.wake_at(time)

    def close(self) -> None:
        """Detach every trigger and drop held messages."""
        for trigger in list(self._triggers):
            trigger.close()
        self._messages.clear()


class QueueTrigger:
    """
    Event-source mapping that invokes a function with batches from a queue.

    The trigger polls whenever a message may have become visible and keeps
    receiving until the queue has no visible message left; each batch starts
    one invocation.

    Args:
        world: The simulation world
        queue: Queue to poll
        handler: Function invoked with each batch
        memory_gb: Memory configured for the function
        batch_size: Maximum batch size
    """

    def __init__(
        self,
        world: "SimWorld",
        queue: MessageQueue,
        handler: FunctionHandler,
        memory_gb: float,
        batch_size: int = MAX_RECEIVE_MESSAGES,
    ):
        self.world = world
        self.queue = queue
        self.handler = handler
        self.memory_gb = memory_gb
        self.batch_size = batch_size
        self.invocations: List[Invocation] = []
        self.closed = False
        self._polls: Dict[float, "EventHandle"] = {}
        queue.attach(self)

    def wake_at(self, time: float) -> None:
        if self.closed:
            return
        time = max(time, self.world.clock)
        if time in self._polls:
            return
        self._polls[time] = self.world.schedule_at(
            time, lambda: self._poll(time), f"poll:{self.queue.name}"
        )

    def _poll(self, time: float) -> None:
        self._polls.pop(time, None)
        if self.closed:
            return
        while True:
            batch = self.queue.receive(self.batch_size)
            if not batch:
                break
            self.invocations.append(
                invoke_function(self.world, self.handler, self.memory_gb, batch, self.queue)
            )

    @property
    def errors(self) -> List[BaseException]:
        return [inv.error for inv in self.invocations if inv.status == "error" and inv.error]

    def close(self) -> None:
        self.closed = True
        for handle in self._polls.values():
            handle.cancel()
        self._polls.clear()
        self.queue.detach(self)
