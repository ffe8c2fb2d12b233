"""
Analysis services.

Closed-form and Monte Carlo cost models: idle time of a fixed cluster
against a batch array job, fixed against dynamic spot strategies, and
resilience of a batch run to instance failures.
"""
import asyncio
import logging
import time
from typing import Any, Dict

import numpy as np

from seisflow.core.cloudsim.catalog import SpotMarket
from seisflow.core.constants import MEASURED_SPOT_PRICE, RESTART_PENALTY_S
from seisflow.core.flow.definition import BUNDLED_DIR
from seisflow.core.metrics.idle import RuntimeSample, cost_table
from seisflow.core.metrics.reports import bar_chart, line_chart, write_svg, write_table
from seisflow.core.metrics.resilience import DEFAULT_REALIZATIONS, resilience_curve
from seisflow.core.metrics.spot import strategy_costs
from seisflow.services.responses import error_response, input_path, output_dir, success_response

# Configure logging
logger = logging.getLogger(__name__)

DEFAULT_RUNTIMES = BUNDLED_DIR / "measured_runtimes.csv"
DEFAULT_FRACTIONS = [round(0.1 * k, 1) for k in range(11)]
DEFAULT_TASK_MINUTES = 45.0
DEFAULT_TASKS = 100


def _idle_cost(params: Dict[str, Any]) -> Dict[str, Any]:
    sample = RuntimeSample.from_csv(input_path(params.get("runtimes") or DEFAULT_RUNTIMES))
    price = float(params.get("price") or MEASURED_SPOT_PRICE)
    workers = params.get("workers") or [sample.count]
    table = cost_table(sample, workers, price)

    out = output_dir(params, "idle-cost")
    files = [write_table(table, out / "idle_cost.csv")]
    if params.get("charts"):
        fig = bar_chart(table.assign(idle_min=table["idle_s"] / 60.0), "n_workers", ["idle_min"], "Cluster idle time")
        files.append(write_svg(fig, out / "idle_cost.svg"))

    first = table.iloc[0]
    return {
        "tasks": sample.count,
        "total_runtime_s": sample.total,
        "longest_s": sample.longest,
        "n_workers": int(first["n_workers"]),
        "idle_s": float(first["idle_s"]),
        "batch_cost": float(first["batch_cost"]),
        "cluster_cost": float(first["cluster_cost"]),
        "files": [str(f) for f in files],
    }


def _spot_strategy(params: Dict[str, Any]) -> Dict[str, Any]:
    market = SpotMarket.from_csv(input_path(params["prices"]))
    report = strategy_costs(
        market,
        int(params.get("iterations") or 10),
        float(params.get("iteration_hours") or 1.0),
        dimension=params.get("dimension") or "zone",
        instance_type=params.get("instance_type"),
        zone=params.get("zone"),
        n_instances=int(params.get("n_instances") or 1),
    )
    frame = report.to_frame()

    out = output_dir(params, "spot-strategy")
    files = [write_table(frame, out / "strategies.csv"), write_table(report.choices_frame(), out / "choices.csv")]
    if params.get("charts"):
        files.append(write_svg(bar_chart(frame, "option", ["relative_cost"], "Relative cost per strategy"), out / "strategies.svg"))

    cheapest_fixed = min(report.fixed, key=lambda k: (report.fixed[k], k))
    return {
        "dimension": report.dimension,
        "dynamic_cost": report.dynamic,
        "fixed_costs": dict(report.fixed),
        "cheapest_fixed": cheapest_fixed,
        "savings_vs_costliest": report.savings(max(report.fixed, key=lambda k: (report.fixed[k], k))),
        "files": [str(f) for f in files],
    }


def _resilience(params: Dict[str, Any]) -> Dict[str, Any]:
    if params.get("runtimes"):
        runtimes = RuntimeSample.from_csv(input_path(params["runtimes"]))
    else:
        minutes = float(params.get("task_minutes") or DEFAULT_TASK_MINUTES)
        runtimes = RuntimeSample(np.full(int(params.get("tasks") or DEFAULT_TASKS), 60.0 * minutes))
    fractions = params.get("fractions") or DEFAULT_FRACTIONS
    penalty = params.get("penalty")
    curve = resilience_curve(
        runtimes,
        fractions,
        restart=not params.get("no_restart", False),
        penalty=RESTART_PENALTY_S if penalty is None else float(penalty),
        realizations=int(params.get("realizations") or DEFAULT_REALIZATIONS),
        seed=int(params.get("seed") or 0),
    )

    out = output_dir(params, "resilience")
    files = [write_table(curve, out / "resilience.csv")]
    if params.get("charts"):
        fig = line_chart(curve, "fraction", "rf_mean", "Resilience factor", error_y="rf_std")
        files.append(write_svg(fig, out / "resilience.svg"))
    return {
        "restart": bool(curve["restart"].iloc[0]),
        "fractions": [float(f) for f in curve["fraction"]],
        "rf_mean": [float(r) for r in curve["rf_mean"]],
        "files": [str(f) for f in files],
    }


async def idle_cost_service(params: Dict[str, Any]) -> Dict[str, Any]:
    """
    Idle time and cost of a fixed cluster running a set of tasks, next to a batch array job.

    Args:
        params: Request parameters
               Optional: 'runtimes' (CSV with a runtime_s column, the bundled
               measurements by default), 'price' ($/h), 'workers' (cluster sizes),
               'out', 'charts'

    Returns:
        Response dictionary; the message gives idle seconds and batch cost
    """
    start_time = time.time()
    try:
        loop = asyncio.get_running_loop()
        data = await loop.run_in_executor(None, _idle_cost, params or {})
    except Exception as e:  # pylint: disable=broad-except
        return error_response(e, start_time, "Idle cost")
    return success_response(f"idle {data['idle_s']:,.0f} s, cost ${data['batch_cost']:.2f}", data, start_time)


async def spot_strategy_service(params: Dict[str, Any]) -> Dict[str, Any]:
    """Fixed against dynamic zone or instance-type choice over a spot price history."""
    start_time = time.time()
    if not params or not params.get("prices"):
        logger.warning("Missing 'prices' parameter in request")
        return {
            "status": "error",
            "message": "Missing required parameter: 'prices'",
            "data": None,
            "error_type": "config",
            "processing_time_ms": int((time.time() - start_time) * 1000),
        }
    try:
        loop = asyncio.get_running_loop()
        data = await loop.run_in_executor(None, _spot_strategy, params)
    except Exception as e:  # pylint: disable=broad-except
        return error_response(e, start_time, "Spot strategy")
    return success_response(
        f"dynamic ${data['dynamic_cost']:.2f}, cheapest fixed {data['cheapest_fixed']} "
        f"${data['fixed_costs'][data['cheapest_fixed']]:.2f}",
        data,
        start_time,
    )


async def resilience_service(params: Dict[str, Any]) -> Dict[str, Any]:
    """
    Monte Carlo resilience factor per failure fraction.

    Args:
        params: Request parameters
               Optional: 'fractions', 'task_minutes', 'tasks', 'runtimes',
               'penalty', 'no_restart', 'realizations', 'seed', 'out', 'charts'
    """
    start_time = time.time()
    try:
        loop = asyncio.get_running_loop()
        data = await loop.run_in_executor(None, _resilience, params or {})
    except Exception as e:  # pylint: disable=broad-except
        return error_response(e, start_time, "Resilience")
    mode = "with restarts" if data["restart"] else "without restarts"
    return success_response(f"{len(data['fractions'])} failure fractions {mode}", data, start_time)
