"""
Producers and drivers of the event-driven reduction.
"""
import logging
from typing import Dict, List, Optional, Sequence

import numpy as np

from seisflow.core.cloudsim.queue import QueueTrigger
from seisflow.core.cloudsim.world import SimWorld
from seisflow.core.constants import REDUCER_MEMORY_GB, REDUCTION_STALL_TIMEOUT_S
from seisflow.core.errors import ReductionError, SimulationError
from seisflow.core.reducer.chunking import ChunkPlan, leaf_key, terminal_key, terminal_prefix
from seisflow.core.reducer.handler import GradientReducer, message_body, terminal_object

# Configure logging
logger = logging.getLogger(__name__)


def publish_gradient(
    world: SimWorld,
    plan: ChunkPlan,
    gradient: np.ndarray,
    shot: int,
    position: int,
    n_b: int,
    iteration: int = 0,
    queue_prefix: str = "grad",
) -> List[str]:
    """
    Store one shot gradient chunk by chunk and announce each chunk on its queue.

    Args:
        world: The simulation world
        plan: Chunk plan of the gradient
        gradient: Gradient of one shot (any shape with ``plan.total`` elements)
        shot: Shot index, used in object keys
        position: Position of the shot in the batch (leaf of the pairing tree)
        n_b: Batch size
        iteration: Iteration the gradient belongs to
        queue_prefix: Prefix of the reduction queue names

    Returns:
        Keys of the stored chunks
    """
    keys = []
    for chunk, values in enumerate(plan.split(gradient)):
        key = leaf_key(iteration, shot, chunk)
        world.store.put_array(
            key, values, {"count": 1, "chunk": chunk, "n_b": n_b, "iteration": iteration}
        )
        queue = world.get_queue(plan.queue_name(queue_prefix, chunk))
        queue.send(message_body(key, chunk, 1, n_b, iteration, (0, position)))
        keys.append(key)
    return keys


def attach_reducers(
    world: SimWorld,
    plan: ChunkPlan,
    handler: GradientReducer,
    queue_prefix: str = "grad",
    memory_gb: float = REDUCER_MEMORY_GB,
) -> List[QueueTrigger]:
    """Create the reduction queues and map each to the reducer function."""
    triggers = []
    for name in plan.queue_names(queue_prefix):
        queue = world.create_queue(name)
        triggers.append(QueueTrigger(world, queue, handler, memory_gb))
    logger.info("Attached reducer to %d queues", len(triggers))
    return triggers


def terminal_keys(world: SimWorld, plan: ChunkPlan, iteration: int = 0) -> Dict[int, str]:
    """Terminal gradient object per finished chunk."""
    return {
        chunk: terminal_object(world, iteration, chunk)
        for chunk in range(plan.n_chunks)
        if world.store.exists(terminal_key(iteration, chunk))
    }


def completion_time(world: SimWorld, plan: ChunkPlan, iteration: int = 0) -> float:
    """Simulation time at which the last chunk of ``iteration`` became terminal."""
    return max(world.store.written_at(terminal_key(iteration, c)) for c in range(plan.n_chunks))


def reduce_all(
    world: SimWorld,
    plan: ChunkPlan,
    n_b: int,
    iteration: int = 0,
    deterministic: bool = False,
    queue_prefix: str = "grad",
    memory_gb: float = REDUCER_MEMORY_GB,
    stall_timeout: float = REDUCTION_STALL_TIMEOUT_S,
    triggers: Optional[Sequence[QueueTrigger]] = None,
) -> Dict[int, str]:
    """
    Run the world until every chunk of ``iteration`` has one terminal object.

    Producers (already scheduled, or already done) must eventually publish
    n_b gradients per chunk.

    Args:
        world: The simulation world
        plan: Chunk plan shared with the producers
        n_b: Batch size
        iteration: Iteration to reduce
        deterministic: Use the fixed pairing order
        queue_prefix: Prefix of the reduction queue names
        memory_gb: Memory configured for the reducer
        stall_timeout: Simulated seconds without store writes that count as a stall
        triggers: Existing triggers to use instead of attaching new ones

    Returns:
        Terminal object key per chunk

    Raises:
        ReductionError: If the reduction stalls, the world runs dry, or a
            reducer invocation fails
    """
    owned = triggers is None
    if triggers is None:
        triggers = attach_reducers(
            world, plan, GradientReducer(deterministic), queue_prefix, memory_gb
        )
    prefix = terminal_prefix(iteration)
    try:
        last_puts = world.store.puts
        while len(world.store.list(prefix)) < plan.n_chunks:
            errors = [e for t in triggers for e in t.errors]
            if errors:
                raise ReductionError(f"reducer failed: {errors[0]}") from errors[0]
            if world.pending == 0:
                raise ReductionError(
                    f"world went idle with {len(world.store.list(prefix))} of "
                    f"{plan.n_chunks} chunks reduced"
                )
            try:
                world.run_until(world.clock + stall_timeout)
            except SimulationError as e:
                raise ReductionError(f"reduction aborted: {e}") from e
            if world.store.puts == last_puts and len(world.store.list(prefix)) < plan.n_chunks:
                raise ReductionError(
                    f"no progress within {stall_timeout:.0f} s at t={world.clock:.1f}"
                )
            last_puts = world.store.puts
        errors = [e for t in triggers for e in t.errors]
        if errors:
            raise ReductionError(f"reducer failed: {errors[0]}") from errors[0]
    finally:
        if owned:
            for trigger in triggers:
                trigger.close()

    keys = terminal_keys(world, plan, iteration)
    logger.info(
        "Reduced %d gradients in %d chunks by t=%.1f s",
        n_b,
        plan.n_chunks,
        completion_time(world, plan, iteration),
    )
    return keys
