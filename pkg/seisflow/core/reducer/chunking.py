"""
Gradient chunking and object keys.

Gradients larger than one function invocation can hold are split into
contiguous chunks, each stored as its own object and reduced through its
own queue. Chunks are assigned to queues round-robin.
"""
import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from seisflow.core.errors import ArgumentError


@dataclass(frozen=True)
class ChunkPlan:
    """Partition of a flattened gradient into contiguous chunks."""

    total: int
    max_object_elems: int
    n_queues: int
    bounds: Tuple[Tuple[int, int], ...]

    @property
    def n_chunks(self) -> int:
        return len(self.bounds)

    @property
    def sizes(self) -> List[int]:
        return [stop - start for start, stop in self.bounds]

    def queue_index(self, chunk: int) -> int:
        """Queue a chunk's messages are sent to."""
        return chunk % self.n_queues

    def queue_names(self, prefix: str) -> List[str]:
        return [f"{prefix}-q{j}" for j in range(self.n_queues)]

    def queue_name(self, prefix: str, chunk: int) -> str:
        return f"{prefix}-q{self.queue_index(chunk)}"

    def split(self, array: np.ndarray) -> List[np.ndarray]:
        """Flatten ``array`` and cut it along the plan."""
        flat = np.asarray(array).reshape(-1)
        if flat.size != self.total:
            raise ArgumentError(f"array of {flat.size} elements does not match plan of {self.total}")
        return [flat[start:stop] for start, stop in self.bounds]

    def join(self, chunks: Sequence[np.ndarray]) -> np.ndarray:
        """Concatenate chunks back into one flat array."""
        if len(chunks) != self.n_chunks:
            raise ArgumentError(f"expected {self.n_chunks} chunks, got {len(chunks)}")
        return np.concatenate([np.asarray(c).reshape(-1) for c in chunks])


def plan_chunks(total_len: int, max_object_elems: int, n_queues: int = 1) -> ChunkPlan:
    """
    Split ``total_len`` elements into ceil(total_len / max_object_elems) chunks.

    Every chunk but the last holds ``max_object_elems`` elements.

    Args:
        total_len: Number of gradient elements
        max_object_elems: Largest chunk size
        n_queues: Number of reduction queues

    Returns:
        ChunkPlan

    Raises:
        ArgumentError: If an input is smaller than 1
    """
    if total_len < 1 or max_object_elems < 1 or n_queues < 1:
        raise ArgumentError("total_len, max_object_elems and n_queues must be >= 1")
    n_chunks = math.ceil(total_len / max_object_elems)
    bounds = tuple(
        (i * max_object_elems, min((i + 1) * max_object_elems, total_len)) for i in range(n_chunks)
    )
    return ChunkPlan(int(total_len), int(max_object_elems), int(n_queues), bounds)


def model_key(iteration: int) -> str:
    """Key of the optimization variable at the start of ``iteration``."""
    return f"x/it{iteration:04d}"


def leaf_key(iteration: int, shot: int, chunk: int) -> str:
    return f"grad/it{iteration:04d}/shot{shot:05d}/c{chunk:03d}"


def partial_key(iteration: int, chunk: int, count: int, tag: str) -> str:
    return f"grad/it{iteration:04d}/c{chunk:03d}/p{count}-{tag}"


def terminal_key(iteration: int, chunk: int) -> str:
    """Marker naming the terminal object of one chunk."""
    return f"terminal/it{iteration:04d}/c{chunk:03d}"


def terminal_prefix(iteration: int) -> str:
    return f"terminal/it{iteration:04d}/"


def misfit_key(iteration: int, shot: int) -> str:
    return f"misfit/it{iteration:04d}/shot{shot:05d}"
