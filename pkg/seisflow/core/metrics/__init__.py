"""
Metrics package: idle time, cost, resilience and spot strategies.
"""
from seisflow.core.metrics.idle import (
    RuntimeSample,
    Schedule,
    batch_cost,
    cluster_cost,
    cost_table,
    idle_time,
    list_schedule,
)
from seisflow.core.metrics.resilience import (
    FailureScenario,
    ResilienceStats,
    resilience_curve,
    resilience_factor,
    simulate_failures,
)
from seisflow.core.metrics.spot import StrategyReport, choose_type, choose_zone, strategy_costs

__all__ = [
    "RuntimeSample",
    "Schedule",
    "batch_cost",
    "cluster_cost",
    "cost_table",
    "idle_time",
    "list_schedule",
    "FailureScenario",
    "ResilienceStats",
    "resilience_curve",
    "resilience_factor",
    "simulate_failures",
    "StrategyReport",
    "choose_type",
    "choose_zone",
    "strategy_costs",
]
