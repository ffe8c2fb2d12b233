"""
Deterministic binary pairing order.

Level 0 holds the n_b leaves in batch order. Node i of level l is summed
with its sibling i ^ 1 as (left + right) into node i // 2 of level l + 1;
an unpaired last node is promoted unchanged. The in-process backend and the
deterministic reducer share this order, which makes their sums bit-identical.
"""
from typing import List, Sequence

import numpy as np

from seisflow.core.errors import ArgumentError


def level_sizes(n_leaves: int) -> List[int]:
    """Node counts per level, from the leaves up to the single root."""
    if n_leaves < 1:
        raise ArgumentError("at least one leaf is required")
    sizes = [n_leaves]
    while sizes[-1] > 1:
        sizes.append((sizes[-1] + 1) // 2)
    return sizes


def tree_sum(arrays: Sequence[np.ndarray]) -> np.ndarray:
    """
    Sum arrays in float32 following the pairing order.

    Raises:
        ArgumentError: On an empty input or mismatched shapes
    """
    if not arrays:
        raise ArgumentError("tree_sum needs at least one array")
    level = [np.asarray(a, dtype=np.float32) for a in arrays]
    shape = level[0].shape
    if any(a.shape != shape for a in level):
        raise ArgumentError("tree_sum inputs must share one shape")
    while len(level) > 1:
        paired = [level[i] + level[i + 1] for i in range(0, len(level) - 1, 2)]
        if len(level) % 2:
            paired.append(level[-1])
        level = paired
    return level[0].copy()
