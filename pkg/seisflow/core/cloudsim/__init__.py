"""
Deterministic discrete-event simulator of the cloud services used by the
serverless imaging workflow: batch jobs on staged-startup instances, spot
markets, an object store, an at-least-once queue and a capped function
runtime.
"""
from seisflow.core.cloudsim.batch import (
    ArrayJob,
    BatchJob,
    MultiNode,
    OnDemand,
    Spot,
    inject_interruption,
    submit_array_job,
)
from seisflow.core.cloudsim.catalog import (
    InstanceType,
    SpotMarket,
    SpotPriceSeries,
    default_catalog,
    spot_price_at,
)
from seisflow.core.cloudsim.functions import FunctionHandler, Invocation, invoke_function
from seisflow.core.cloudsim.queue import MessageQueue, QueueMessage, QueueTrigger
from seisflow.core.cloudsim.scenario import Scenario, load_scenario, scenario_from_dict
from seisflow.core.cloudsim.storage import ObjectStore
from seisflow.core.cloudsim.world import FailurePlan, SimConfig, SimWorld

__all__ = [
    "ArrayJob",
    "BatchJob",
    "FailurePlan",
    "FunctionHandler",
    "InstanceType",
    "Invocation",
    "MessageQueue",
    "MultiNode",
    "ObjectStore",
    "OnDemand",
    "QueueMessage",
    "QueueTrigger",
    "Scenario",
    "SimConfig",
    "SimWorld",
    "Spot",
    "SpotMarket",
    "SpotPriceSeries",
    "default_catalog",
    "inject_interruption",
    "invoke_function",
    "load_scenario",
    "scenario_from_dict",
    "spot_price_at",
    "submit_array_job",
]
