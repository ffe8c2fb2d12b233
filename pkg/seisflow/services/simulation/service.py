"""
Simulation services.

Experiments that run only on the simulated cloud: the event-driven
gradient reduction under duplicate delivery, and the weak-scaling sweep
of one iteration's time-to-solution.
"""
import asyncio
import dataclasses
import logging
import time
from typing import Any, Dict, List, Sequence

import numpy as np
import pandas as pd

from seisflow.core.cloudsim.scenario import Scenario, load_scenario
from seisflow.core.errors import ArgumentError, ReductionError
from seisflow.core.flow.lsrtm import GRADIENT_TASK_RUNTIME_S
from seisflow.core.metrics.reports import bar_chart, line_chart, write_svg, write_table
from seisflow.core.metrics.scaling import summarize_scaling, weak_scaling_experiment
from seisflow.core.reducer.chunking import plan_chunks
from seisflow.core.reducer.driver import attach_reducers, completion_time, publish_gradient, reduce_all
from seisflow.core.reducer.handler import GradientReducer, read_sum, terminal_object
from seisflow.services.responses import error_response, input_path, output_dir, success_response

# Configure logging
logger = logging.getLogger(__name__)

DEMO_DEFAULTS = {
    "n_b": 128,
    "elems": 64,
    "max_object_elems": 16,
    "n_queues": 2,
    "duplication": 0.1,
    "runs": 20,
    "spread_s": 100.0,
    "seed": 0,
}
DEFAULT_BATCH_SIZES = [1, 10, 25, 50, 100]
RUN_RESULT_COLUMNS = ["seed", "chunk", "count", "max_rel_error", "completion_s", "sums", "dropped"]


def _scenario(params: Dict[str, Any]) -> Scenario:
    scenario = load_scenario(input_path(params["scenario"])) if params.get("scenario") else Scenario()
    if params.get("seed") is not None:
        scenario = dataclasses.replace(scenario, seed=int(params["seed"]))
    return scenario


def _reduce_once(
    scenario: Scenario, seed: int, gradients: Sequence[np.ndarray], settings: Dict[str, Any]
) -> List[Dict[str, Any]]:
    config = dataclasses.replace(scenario.config, duplication_probability=float(settings["duplication"]))
    world = dataclasses.replace(scenario, config=config).build_world(seed)
    plan = plan_chunks(len(gradients[0]), int(settings["max_object_elems"]), int(settings["n_queues"]))
    handler = GradientReducer(bool(settings.get("deterministic", False)))
    triggers = attach_reducers(world, plan, handler)

    n_b = len(gradients)
    starts = np.random.default_rng([seed, 0]).uniform(0.0, float(settings["spread_s"]), n_b)
    for position, (start, gradient) in enumerate(zip(starts, gradients)):
        world.schedule(
            float(start),
            lambda p=position, g=gradient: publish_gradient(world, plan, g, p, p, n_b),
            f"publish:{position}",
        )
    reduce_all(world, plan, n_b, triggers=triggers)

    expected = plan.split(np.sum(np.stack(gradients).astype(np.float64), axis=0))
    rows = []
    for chunk in range(plan.n_chunks):
        reduced = read_sum(world, 0, chunk).astype(np.float64)
        scale = np.maximum(np.abs(expected[chunk]), np.finfo(np.float64).tiny)
        rows.append(
            {
                "seed": seed,
                "chunk": chunk,
                "count": int(world.store.head(terminal_object(world, 0, chunk))["count"]),
                "max_rel_error": float(np.max(np.abs(reduced - expected[chunk]) / scale)),
                "completion_s": completion_time(world, plan),
                "sums": handler.sums,
                "dropped": handler.dropped,
            }
        )
    return rows


def _reduce_demo(params: Dict[str, Any]) -> Dict[str, Any]:
    settings = {**DEMO_DEFAULTS, **{k: v for k, v in params.items() if v is not None}}
    if int(settings["n_b"]) < 1 or int(settings["runs"]) < 1:
        raise ArgumentError("n_b and runs must be >= 1")
    scenario = _scenario(params)
    data_rng = np.random.default_rng(int(settings["seed"]))
    # integer-valued gradients keep every float32 partial sum exact
    gradients = [
        data_rng.integers(-1000, 1000, int(settings["elems"])).astype(np.float32)
        for _ in range(int(settings["n_b"]))
    ]

    rows: List[Dict[str, Any]] = []
    for run in range(int(settings["runs"])):
        rows.extend(_reduce_once(scenario, int(settings["seed"]) + run, gradients, settings))
    frame = pd.DataFrame(rows, columns=RUN_RESULT_COLUMNS)

    out = output_dir(params, "reduce-demo")
    files = [write_table(frame, out / "reduction.csv")]
    if params.get("charts"):
        per_run = frame.groupby("seed", as_index=False)["completion_s"].max()
        files.append(write_svg(line_chart(per_run, "seed", "completion_s", "Reduction completion time"), out / "completion.svg"))

    bad_counts = int((frame["count"] != int(settings["n_b"])).sum())
    if bad_counts:
        raise ReductionError(f"{bad_counts} terminal objects do not aggregate {settings['n_b']} gradients")
    return {
        "runs": int(settings["runs"]),
        "n_b": int(settings["n_b"]),
        "chunks": int(frame["chunk"].nunique()),
        "max_rel_error": float(frame["max_rel_error"].max()),
        "dropped_duplicates": int(frame.groupby("seed")["dropped"].max().sum()),
        "files": [str(f) for f in files],
    }


def _weak_scaling(params: Dict[str, Any]) -> Dict[str, Any]:
    scenario = _scenario(params)
    batch_sizes = params.get("batch_sizes") or DEFAULT_BATCH_SIZES
    runs = weak_scaling_experiment(
        scenario,
        batch_sizes,
        float(params.get("runtime_s") or GRADIENT_TASK_RUNTIME_S),
        repetitions=int(params.get("repetitions") or 3),
    )
    summary = summarize_scaling(runs)

    out = output_dir(params, "weak-scaling")
    files = [write_table(runs, out / "runs.csv"), write_table(summary, out / "summary.csv")]
    if params.get("charts"):
        tts = line_chart(summary, "n_b", "total_s_mean", "Time to solution per iteration", error_y="total_s_std")
        parts = bar_chart(
            summary, "n_b", ["startup_mean_s_mean", "runtime_mean_s_mean", "tail_s_mean"], "Time-to-solution components"
        )
        files.append(write_svg(tts, out / "time_to_solution.svg"))
        files.append(write_svg(parts, out / "components.svg"))
    return {
        "batch_sizes": [int(b) for b in summary["n_b"]],
        "total_s_mean": [float(t) for t in summary["total_s_mean"]],
        "cost_mean": [float(c) for c in summary["cost_mean"]],
        "files": [str(f) for f in files],
    }


async def reduce_demo_service(params: Dict[str, Any]) -> Dict[str, Any]:
    """
    Reduce random gradients on the simulated cloud and compare with the direct sum.

    Args:
        params: Request parameters
               Optional: 'n_b', 'elems', 'max_object_elems', 'n_queues',
               'duplication', 'runs', 'seed', 'scenario', 'deterministic',
               'out', 'charts'

    Returns:
        Response dictionary; ``data`` holds the worst relative error over all runs
    """
    start_time = time.time()
    logger.info("Starting reduction demo")
    try:
        loop = asyncio.get_running_loop()
        data = await loop.run_in_executor(None, _reduce_demo, params or {})
    except Exception as e:  # pylint: disable=broad-except
        return error_response(e, start_time, "Reduction demo")
    return success_response(
        f"{data['runs']} runs of {data['n_b']} gradients, max relative error {data['max_rel_error']:.2e}",
        data,
        start_time,
    )


async def weak_scaling_service(params: Dict[str, Any]) -> Dict[str, Any]:
    """
    Sweep batch sizes and time one iteration for each.

    Args:
        params: Request parameters
               Optional: 'batch_sizes', 'runtime_s', 'repetitions', 'seed',
               'scenario', 'out', 'charts'
    """
    start_time = time.time()
    logger.info("Starting weak-scaling sweep")
    try:
        loop = asyncio.get_running_loop()
        data = await loop.run_in_executor(None, _weak_scaling, params or {})
    except Exception as e:  # pylint: disable=broad-except
        return error_response(e, start_time, "Weak scaling")
    return success_response(f"{len(data['batch_sizes'])} batch sizes", data, start_time)
