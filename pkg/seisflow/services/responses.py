"""
Response dictionaries shared by the services.

Services never raise to their callers: they return a dictionary with
``status`` (``success`` or ``error``), ``message``, ``data``,
``error_type`` (``config`` or ``runtime``) and ``processing_time_ms``.
"""
import logging
import time
from pathlib import Path
from typing import Any, Dict, Optional, Union

from seisflow.core.constants import RESULTS_DIR
from seisflow.core.errors import ArgumentError, ConfigError, DataError, WorkflowParseError
from seisflow.core.flow.definition import BUNDLED_DIR

# Configure logging
logger = logging.getLogger(__name__)

# Errors caused by the inputs rather than by the run itself
CONFIG_ERRORS = (ConfigError, WorkflowParseError, ArgumentError, DataError)


def error_type(error: BaseException) -> str:
    return "config" if isinstance(error, CONFIG_ERRORS) else "runtime"


def elapsed_ms(start_time: float) -> int:
    return int((time.time() - start_time) * 1000)


def success_response(message: str, data: Any, start_time: float) -> Dict[str, Any]:
    return {
        "status": "success",
        "message": message,
        "data": data,
        "error_type": None,
        "processing_time_ms": elapsed_ms(start_time),
    }


def error_response(error: BaseException, start_time: float, context: str) -> Dict[str, Any]:
    """Response for a failed request, logged with its traceback."""
    kind = error_type(error)
    logger.error("%s failed (%s): %s", context, kind, error, exc_info=kind == "runtime")
    return {
        "status": "error",
        "message": f"{context} failed: {error}",
        "data": None,
        "error_type": kind,
        "processing_time_ms": elapsed_ms(start_time),
    }


def output_dir(params: Dict[str, Any], subcommand: str) -> Path:
    """``params["out"]`` or ``<results dir>/<subcommand>``."""
    out: Optional[Union[str, Path]] = params.get("out")
    return Path(out) if out else Path(RESULTS_DIR) / subcommand


def input_path(path: Union[str, Path]) -> Path:
    """
    Resolve an input file, falling back to the bundled copy for bare file names.

    ``toy.json`` names ``seisflow/config/toy.json`` unless a file of that name
    exists in the working directory.
    """
    path = Path(path)
    if not path.exists() and path.parent == Path(".") and (BUNDLED_DIR / path.name).exists():
        return BUNDLED_DIR / path.name
    return path
