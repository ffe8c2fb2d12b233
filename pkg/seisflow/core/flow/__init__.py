"""
JSON state-machine interpreter driving the serverless imaging workflow.
"""
from seisflow.core.flow.definition import (
    RetryPolicy,
    State,
    WorkflowDefinition,
    bundled_workflow,
    load_workflow,
    parse_workflow,
)
from seisflow.core.flow.executor import Bindings, ExecutionTrace, TraceStep, execute, transition_cost

__all__ = [
    "Bindings",
    "ExecutionTrace",
    "RetryPolicy",
    "State",
    "TraceStep",
    "WorkflowDefinition",
    "bundled_workflow",
    "execute",
    "load_workflow",
    "parse_workflow",
    "transition_cost",
]
