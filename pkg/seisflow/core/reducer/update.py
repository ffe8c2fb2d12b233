"""
Final update of an iteration.

Once every chunk of the summed gradient is terminal, one more function
streams the current optimization variable from the store, applies the
gradient step chunk by chunk and writes the next iterate back.
"""
import json
import logging
from typing import TYPE_CHECKING, List, Optional, Sequence

import numpy as np

from seisflow.core.cloudsim.functions import FunctionHandler, Invocation, invoke_function
from seisflow.core.cloudsim.queue import QueueMessage
from seisflow.core.constants import REDUCER_MEMORY_GB
from seisflow.core.errors import ObjectNotFoundError, ProtocolError
from seisflow.core.imaging.optimizer import sgd_step
from seisflow.core.reducer.chunking import ChunkPlan, model_key, terminal_key

if TYPE_CHECKING:
    from seisflow.core.cloudsim.queue import MessageQueue
    from seisflow.core.cloudsim.storage import ObjectStore
    from seisflow.core.cloudsim.world import SimWorld

# Configure logging
logger = logging.getLogger(__name__)


def finalize_update(
    store: "ObjectStore",
    x_key: str,
    terminal_grad_keys: Sequence[str],
    step_size: float,
    new_key: Optional[str] = None,
) -> str:
    """
    Write x - step_size * g, with g assembled from its terminal chunks.

    Args:
        store: Object store holding x and the gradient chunks
        x_key: Key of the current optimization variable
        terminal_grad_keys: Terminal gradient objects in chunk order
        step_size: Fixed SGD step
        new_key: Key of the updated variable (default: ``x_key + "/next"``)

    Returns:
        Key of the updated variable; its write time marks the end of the iteration

    Raises:
        ProtocolError: If a chunk is missing, not terminal, or sizes disagree
    """
    x = store.get_array(x_key)
    chunks: List[np.ndarray] = []
    for key in terminal_grad_keys:
        try:
            meta = store.head(key)
            chunks.append(store.get_array(key).reshape(-1))
        except ObjectNotFoundError as e:
            raise ProtocolError(f"gradient chunk {key} is missing") from e
        if "n_b" in meta and meta.get("count") != meta["n_b"]:
            raise ProtocolError(f"gradient chunk {key} sums {meta.get('count')} of {meta['n_b']}")
    if not chunks:
        raise ProtocolError("no gradient chunks to apply")
    g = np.concatenate(chunks)
    if g.size != x.size:
        raise ProtocolError(f"gradient has {g.size} elements, variable has {x.size}")

    x_new = sgd_step(x.reshape(-1), g, step_size).reshape(x.shape)
    new_key = new_key or f"{x_key}/next"
    store.put_array(new_key, x_new, {"grad_norm": float(np.linalg.norm(g.astype(np.float64)))})
    logger.info("Updated %s -> %s with step %g", x_key, new_key, step_size)
    return new_key


class ModelUpdater(FunctionHandler):
    """
    Function applying :func:`finalize_update` for one iteration.

    It is invoked directly (not through a queue) with a single event whose
    body names the iteration.

    Args:
        plan: Chunk plan of the gradient
        step_size: Fixed SGD step
        memory_gb: Memory configured for the function
    """

    name = "update"

    def __init__(self, plan: ChunkPlan, step_size: float, memory_gb: float = REDUCER_MEMORY_GB):
        self.plan = plan
        self.step_size = float(step_size)
        self.memory_gb = memory_gb
        self.invocations: List[Invocation] = []

    def _grad_keys(self, world: "SimWorld", iteration: int) -> List[str]:
        keys = []
        for chunk in range(self.plan.n_chunks):
            try:
                marker = world.store.get(terminal_key(iteration, chunk))
            except ObjectNotFoundError as e:
                raise ProtocolError(f"iteration {iteration} chunk {chunk} is not terminal") from e
            keys.append(json.loads(marker.decode())["key"])
        return keys

    def modeled_duration(self, world: "SimWorld", messages: List[QueueMessage]) -> float:
        cfg = world.config
        elems = self.plan.total
        # read x, read g, write x'
        moved = 3 * 4 * elems
        return cfg.store_latency_s * (self.plan.n_chunks + 2) + moved / (cfg.store_bandwidth_mb_s * 1e6)

    def handle(
        self,
        world: "SimWorld",
        messages: List[QueueMessage],
        queue: Optional["MessageQueue"],
    ) -> List[str]:
        written = []
        for message in messages:
            iteration = int(message.body["iteration"])
            grad_keys = self._grad_keys(world, iteration)
            written.append(
                finalize_update(
                    world.store,
                    model_key(iteration),
                    grad_keys,
                    self.step_size,
                    model_key(iteration + 1),
                )
            )
            for key in grad_keys:
                world.store.delete(key)
        return written

    def trigger(self, world: "SimWorld", iteration: int) -> Invocation:
        """Invoke the update for ``iteration``."""
        event = QueueMessage(
            id=world.next_id("evt"),
            body={"iteration": int(iteration)},
            seq=-1,
            sent_at=world.clock,
            visible_at=world.clock,
        )
        invocation = invoke_function(world, self, self.memory_gb, [event])
        self.invocations.append(invocation)
        return invocation
