"""
Inversion service.

Runs an LS-RTM problem with the in-process or the simulated backend and
writes its history, final model and (for the simulated cloud) the
workflow trace and cost ledger.
"""
import asyncio
import logging
import time
from pathlib import Path
from typing import Any, Dict, List

from seisflow.core.cloudsim.scenario import Scenario, load_scenario
from seisflow.core.flow.definition import bundled_workflow, load_workflow
from seisflow.core.imaging.backends import SimulatedBackend
from seisflow.core.imaging.factory import create_backend
from seisflow.core.imaging.inversion import run_inversion
from seisflow.core.imaging.survey import HISTORY_COLUMNS, load_problem
from seisflow.core.metrics.reports import line_chart, write_svg, write_table
from seisflow.core.wavekit.io import save_model
from seisflow.services.responses import error_response, input_path, output_dir, success_response

# Configure logging
logger = logging.getLogger(__name__)


def _invert(params: Dict[str, Any]) -> Dict[str, Any]:
    problem = load_problem(input_path(params["config"]), params.get("seed"))
    name = params.get("backend", "in-process")
    if name == "simulated":
        scenario = load_scenario(input_path(params["scenario"])) if params.get("scenario") else Scenario()
        kwargs: Dict[str, Any] = {"problem": problem, "scenario": scenario}
        if params.get("workflow"):
            kwargs["workflow"] = input_path(params["workflow"])
        backend = create_backend(name, **kwargs)
    else:
        backend = create_backend(name, max_workers=int(params.get("workers", 1)))

    result = run_inversion(problem.survey, problem.config, backend)

    out = output_dir(params, "invert")
    simulated = isinstance(backend, SimulatedBackend)
    # wall-clock timings would make repeated in-process runs differ
    columns = None if simulated else [c for c in HISTORY_COLUMNS if c != "wall_s"]
    files: List[Path] = [result.history.write_csv(out / "history.csv", columns)]
    files.append(save_model(out / "model", result.model))
    if simulated and backend.last_world is not None:
        files.append(write_table(backend.last_trace.to_frame(), out / "trace.csv"))
        files.append(backend.last_world.write_ledger(out / "ledger.csv"))
    if params.get("charts"):
        fig = line_chart(result.history.to_frame(), "iteration", "misfit", "Data misfit per iteration")
        files.append(write_svg(fig, out / "misfit.svg"))

    misfits = result.history.misfits
    cost = None
    if simulated and backend.last_world is not None:
        cost = backend.last_world.total_cost()
    return {
        "backend": result.backend,
        "cost": cost,
        "iterations": len(result.history),
        "step_size": result.step_size,
        "initial_misfit": misfits[0] if misfits else None,
        "final_misfit": misfits[-1] if misfits else None,
        "elapsed_s": result.elapsed_s,
        "files": [str(f) for f in files],
    }


async def invert_service(params: Dict[str, Any]) -> Dict[str, Any]:
    """
    Run an inversion.

    Args:
        params: Request parameters
               Required: 'config' - problem JSON file
               Optional: 'seed', 'backend' ('in-process' or 'simulated'),
               'scenario', 'workflow', 'workers', 'out', 'charts'

    Returns:
        Response dictionary; ``data`` summarizes the run and lists the files written
    """
    start_time = time.time()
    if not params or not params.get("config"):
        logger.warning("Missing 'config' parameter in request")
        return {
            "status": "error",
            "message": "Missing required parameter: 'config'",
            "data": None,
            "error_type": "config",
            "processing_time_ms": int((time.time() - start_time) * 1000),
        }

    logger.info("Starting inversion of %s", params["config"])
    try:
        # CPU-bound work runs in the default thread pool
        loop = asyncio.get_running_loop()
        data = await loop.run_in_executor(None, _invert, params)
    except Exception as e:  # pylint: disable=broad-except
        return error_response(e, start_time, "Inversion")
    return success_response(
        f"{data['iterations']} iterations, misfit {data['initial_misfit']:.4g} -> {data['final_misfit']:.4g}",
        data,
        start_time,
    )


async def validate_workflow_service(params: Dict[str, Any]) -> Dict[str, Any]:
    """
    Parse a workflow file (the bundled ``lsrtm.json`` when no 'path' is given).

    Returns:
        Response dictionary; the message reads ``"<n> states, OK"``
    """
    start_time = time.time()
    try:
        given = (params or {}).get("path")
        if given:
            path = input_path(given)
            definition = load_workflow(path)
        else:
            path, definition = bundled_workflow()
    except Exception as e:  # pylint: disable=broad-except
        return error_response(e, start_time, "Workflow validation")
    data = {
        "path": str(path),
        "states": len(definition),
        "start_at": definition.start_at,
        "resources": definition.resources,
        "predicates": definition.predicates,
    }
    return success_response(f"{len(definition)} states, OK", data, start_time)
