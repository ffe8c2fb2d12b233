"""
Queue-triggered gradient summation.

Each message names a stored gradient object and carries how many shot
gradients that object already sums. An invocation loads the objects named
by its batch, sums them, writes the partial sum under a fresh key and sends
its message back to the queue, until one object per chunk holds all n_b
gradients. Deleting consumed objects is the commit point: a redelivered or
duplicated message whose object is gone is dropped.

Message body: ``{"key", "chunk", "count", "n_b", "iteration", "node"}``
where ``node`` is the ``[level, index]`` position used by the deterministic
pairing mode.
"""
import json
import logging
from collections import defaultdict
from typing import TYPE_CHECKING, Any, Dict, List, Optional, Tuple

import numpy as np

from seisflow.core.cloudsim.functions import FunctionHandler
from seisflow.core.errors import ProtocolError
from seisflow.core.reducer.chunking import partial_key, terminal_key, terminal_prefix
from seisflow.core.reducer.tree import level_sizes

if TYPE_CHECKING:
    from seisflow.core.cloudsim.queue import MessageQueue, QueueMessage
    from seisflow.core.cloudsim.world import SimWorld
    from seisflow.core.reducer.update import ModelUpdater

# Configure logging
logger = logging.getLogger(__name__)


def message_body(
    key: str,
    chunk: int,
    count: int,
    n_b: int,
    iteration: int = 0,
    node: Tuple[int, int] = (0, 0),
) -> Dict[str, Any]:
    """Body of a message announcing a stored gradient object."""
    return {
        "key": key,
        "chunk": int(chunk),
        "count": int(count),
        "n_b": int(n_b),
        "iteration": int(iteration),
        "node": [int(node[0]), int(node[1])],
    }


class GradientReducer(FunctionHandler):
    """
    Function summing the gradient objects named by a batch of messages.

    Args:
        deterministic: Only combine siblings of the fixed binary pairing
            order instead of whatever arrives together
        updater: Invoked once every chunk of an iteration is terminal
    """

    name = "reducer"

    def __init__(self, deterministic: bool = False, updater: Optional["ModelUpdater"] = None):
        self.deterministic = deterministic
        self.updater = updater
        self.dropped = 0
        self.returned = 0
        self.sums = 0

    def modeled_duration(self, world: "SimWorld", messages: List["QueueMessage"]) -> float:
        # a lone message is only inspected
        if len(messages) < 2:
            return 0.0
        cfg = world.config
        sizes = [world.store.size(m.body["key"]) for m in messages if m.body["key"] in world.store]
        moved = sum(sizes) + (max(sizes) if sizes else 0)
        return cfg.store_latency_s * (len(sizes) + 1) + moved / (cfg.store_bandwidth_mb_s * 1e6)

    def handle(
        self,
        world: "SimWorld",
        messages: List["QueueMessage"],
        queue: Optional["MessageQueue"],
    ) -> Dict[str, int]:
        if queue is None:
            raise ProtocolError("the reducer must be triggered by a queue")
        groups: Dict[Tuple[int, int], List["QueueMessage"]] = defaultdict(list)
        for message in messages:
            body = message.body
            groups[(body["iteration"], body["chunk"])].append(message)

        for (iteration, chunk), group in sorted(groups.items()):
            live = self._live(world, queue, iteration, chunk, group)
            if not live:
                continue
            if self.deterministic:
                self._reduce_pairs(world, queue, live)
            else:
                self._reduce_group(world, queue, live)
        return {"dropped": self.dropped, "returned": self.returned, "sums": self.sums}

    def _live(
        self,
        world: "SimWorld",
        queue: "MessageQueue",
        iteration: int,
        chunk: int,
        group: List["QueueMessage"],
    ) -> List["QueueMessage"]:
        """Drop messages whose object was already consumed or whose chunk is done."""
        done = world.store.exists(terminal_key(iteration, chunk))
        live = []
        seen = set()
        for message in group:
            body = message.body
            if done or body["key"] in seen or not world.store.exists(body["key"]):
                logger.warning(
                    "%s: dropping message %s for consumed object %s",
                    queue.name,
                    message.id,
                    body["key"],
                )
                queue.delete(message)
                self.dropped += 1
                continue
            if not 1 <= body["count"] <= body["n_b"]:
                raise ProtocolError(
                    f"object {body['key']} sums {body['count']} of {body['n_b']} gradients"
                )
            seen.add(body["key"])
            live.append(message)
        return live

    def _sum(
        self, world: "SimWorld", queue: "MessageQueue", ordered: List["QueueMessage"], node: Tuple[int, int]
    ) -> None:
        """Sum the objects of ``ordered`` left to right and commit the result."""
        store = world.store
        first = ordered[0].body
        arrays = [store.get_array(m.body["key"]) for m in ordered]
        shape = arrays[0].shape
        if any(a.shape != shape for a in arrays):
            raise ProtocolError(
                f"chunk {first['chunk']}: mismatched shapes {[a.shape for a in arrays]}"
            )
        total = arrays[0].copy()
        for array in arrays[1:]:
            total += array
        count = sum(m.body["count"] for m in ordered)
        if count > first["n_b"]:
            raise ProtocolError(
                f"chunk {first['chunk']}: partial sums {count} gradients of {first['n_b']}"
            )

        key = partial_key(first["iteration"], first["chunk"], count, world.random_tag())
        store.put_array(
            key,
            total,
            {"count": count, "chunk": first["chunk"], "n_b": first["n_b"], "iteration": first["iteration"]},
        )
        body = message_body(key, first["chunk"], count, first["n_b"], first["iteration"], node)
        if count == first["n_b"]:
            self._finish(world, body)
        else:
            queue.send(body)
        for message in ordered:
            queue.delete(message)
            store.delete(message.body["key"])
        self.sums += 1
        logger.debug("%s: summed %d objects into %s (count %d)", queue.name, len(ordered), key, count)

    def _reduce_group(
        self, world: "SimWorld", queue: "MessageQueue", live: List["QueueMessage"]
    ) -> None:
        if len(live) == 1:
            message = live[0]
            if message.body["count"] == message.body["n_b"]:
                self._finish(world, message.body)
                queue.delete(message)
            else:
                queue.return_message(message)
                self.returned += 1
            return
        self._sum(world, queue, live, (0, 0))

    def _reduce_pairs(
        self, world: "SimWorld", queue: "MessageQueue", live: List["QueueMessage"]
    ) -> None:
        by_node: Dict[Tuple[int, int], "QueueMessage"] = {}
        for message in live:
            node = tuple(message.body["node"])
            if node in by_node:
                raise ProtocolError(f"two live objects claim tree node {node}")
            by_node[node] = message  # type: ignore[index]

        sizes = level_sizes(live[0].body["n_b"])
        handled = set()
        for (level, index), message in sorted(by_node.items()):
            if (level, index) in handled:
                continue
            body = message.body
            width = sizes[level]
            if width == 1:
                if body["count"] != body["n_b"]:
                    raise ProtocolError(f"root of chunk {body['chunk']} sums {body['count']} gradients")
                self._finish(world, body)
                queue.delete(message)
            elif index % 2 == 0 and index == width - 1:
                self._promote(world, queue, message, (level + 1, index // 2))
            elif (level, index ^ 1) in by_node:
                left, right = sorted([index, index ^ 1])
                pair = [by_node[(level, left)], by_node[(level, right)]]
                self._sum(world, queue, pair, (level + 1, index // 2))
                handled.add((level, index ^ 1))
            else:
                queue.return_message(message)
                self.returned += 1
            handled.add((level, index))

    def _promote(
        self, world: "SimWorld", queue: "MessageQueue", message: "QueueMessage", node: Tuple[int, int]
    ) -> None:
        """Move an unpaired node one level up under a fresh key."""
        store = world.store
        body = message.body
        key = partial_key(body["iteration"], body["chunk"], body["count"], world.random_tag())
        store.put(key, store.get(body["key"]), store.head(body["key"]))
        queue.send(message_body(key, body["chunk"], body["count"], body["n_b"], body["iteration"], node))
        queue.delete(message)
        store.delete(body["key"])

    def _finish(self, world: "SimWorld", body: Dict[str, Any]) -> None:
        """Record the terminal object of a chunk; start the update once all chunks are done."""
        iteration, chunk = body["iteration"], body["chunk"]
        world.store.put(
            terminal_key(iteration, chunk),
            json.dumps({"key": body["key"], "count": body["count"], "chunk": chunk}).encode(),
        )
        logger.info(
            "Iteration %d chunk %d terminal: %s sums %d gradients",
            iteration,
            chunk,
            body["key"],
            body["count"],
        )
        if self.updater is not None:
            done = len(world.store.list(terminal_prefix(iteration)))
            if done == self.updater.plan.n_chunks:
                self.updater.trigger(world, iteration)


def terminal_object(world: "SimWorld", iteration: int, chunk: int) -> str:
    """Key of the terminal gradient object of one chunk."""
    marker = json.loads(world.store.get(terminal_key(iteration, chunk)).decode())
    return marker["key"]


def read_sum(world: "SimWorld", iteration: int, chunk: int) -> np.ndarray:
    return world.store.get_array(terminal_object(world, iteration, chunk))
