"""
CSV tables and SVG charts of experiment results.
"""
import logging
from pathlib import Path
from typing import Optional, Sequence, Union

import pandas as pd
import plotly.express as px
import plotly.graph_objects as go

from seisflow.core.constants import PLOT_CONFIG
from seisflow.core.errors import ConfigError

# Configure logging
logger = logging.getLogger(__name__)


def _prepare(path: Union[str, Path]) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise ConfigError(f"cannot create output directory {path.parent}: {e}") from e
    return path


def write_table(frame: pd.DataFrame, path: Union[str, Path]) -> Path:
    """Write a table as CSV with a header row and no index."""
    path = _prepare(path)
    frame.to_csv(path, index=False)
    logger.info("Wrote %d rows to %s", len(frame), path)
    return path


def _style(fig: go.Figure, title: str) -> go.Figure:
    fig.update_layout(
        title=title,
        template=PLOT_CONFIG["template"],
        width=PLOT_CONFIG["width"],
        height=PLOT_CONFIG["height"],
    )
    return fig


def line_chart(
    frame: pd.DataFrame,
    x: str,
    y: Union[str, Sequence[str]],
    title: str,
    error_y: Optional[str] = None,
    labels: Optional[dict] = None,
) -> go.Figure:
    """Line chart of one or more columns against ``x``."""
    fig = px.line(frame, x=x, y=y, error_y=error_y, markers=True, labels=labels or {})
    return _style(fig, title)


def bar_chart(
    frame: pd.DataFrame,
    x: str,
    y: Union[str, Sequence[str]],
    title: str,
    labels: Optional[dict] = None,
) -> go.Figure:
    """Bar chart, stacked when several columns are given."""
    fig = px.bar(frame, x=x, y=y, labels=labels or {})
    fig.update_layout(barmode="stack")
    return _style(fig, title)


def write_svg(fig: go.Figure, path: Union[str, Path]) -> Path:
    """
    Export a figure as SVG (requires kaleido).

    Raises:
        ConfigError: If the static image export is unavailable
    """
    path = _prepare(path)
    try:
        fig.write_image(str(path), format="svg")
    except (ValueError, ImportError, RuntimeError) as e:
        raise ConfigError(f"cannot export {path}: {e}") from e
    logger.info("Wrote chart %s", path)
    return path
