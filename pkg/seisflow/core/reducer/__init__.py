"""
Event-driven gradient summation over the simulated queue and object store.
"""
from seisflow.core.reducer.chunking import ChunkPlan, model_key, plan_chunks
from seisflow.core.reducer.driver import (
    attach_reducers,
    completion_time,
    publish_gradient,
    reduce_all,
    terminal_keys,
)
from seisflow.core.reducer.handler import GradientReducer, message_body
from seisflow.core.reducer.tree import level_sizes, tree_sum
from seisflow.core.reducer.update import ModelUpdater, finalize_update

__all__ = [
    "ChunkPlan",
    "GradientReducer",
    "ModelUpdater",
    "attach_reducers",
    "completion_time",
    "finalize_update",
    "level_sizes",
    "message_body",
    "model_key",
    "plan_chunks",
    "publish_gradient",
    "reduce_all",
    "terminal_keys",
    "tree_sum",
]
