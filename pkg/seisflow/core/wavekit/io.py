"""
Model and record files.

An array is stored as ``<stem>.bin`` (raw little-endian float32, C order)
next to a ``<stem>.json`` header {shape, spacing, dtype, byte_order}.
"""
import json
import logging
from pathlib import Path
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from seisflow.core.errors import DataError
from seisflow.core.wavekit.grid import VelocityModel

# Configure logging
logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def _paths(stem: PathLike) -> Tuple[Path, Path]:
    stem = Path(stem)
    if stem.suffix in (".json", ".bin"):
        stem = stem.with_suffix("")
    return stem.with_suffix(".json"), stem.with_suffix(".bin")


def save_array(stem: PathLike, array: np.ndarray, spacing: Optional[Sequence[float]] = None) -> Path:
    """
    Write an array and its JSON sidecar.

    Args:
        stem: Output path without suffix
        array: Array to store (cast to float32)
        spacing: Optional grid spacing recorded in the header

    Returns:
        Path of the JSON header
    """
    header_path, data_path = _paths(stem)
    header_path.parent.mkdir(parents=True, exist_ok=True)
    data = np.ascontiguousarray(array, dtype="<f4")
    header = {
        "shape": list(data.shape),
        "spacing": list(spacing) if spacing is not None else None,
        "dtype": "f32le",
        "byte_order": "little",
    }
    header_path.write_text(json.dumps(header, indent=2))
    data_path.write_bytes(data.tobytes())
    logger.debug("Wrote %s with shape %s", data_path, data.shape)
    return header_path


def load_array(stem: PathLike) -> Tuple[np.ndarray, dict]:
    """
    Read an array written by save_array.

    Returns:
        (array, header)

    Raises:
        DataError: On a malformed header or a size mismatch
    """
    header_path, data_path = _paths(stem)
    try:
        header = json.loads(header_path.read_text())
        shape = tuple(int(n) for n in header["shape"])
    except (OSError, ValueError, KeyError, TypeError) as e:
        raise DataError(f"invalid header {header_path}: {e}") from e
    if header.get("dtype") != "f32le" or header.get("byte_order") != "little":
        raise DataError(f"unsupported encoding in {header_path}")
    raw = data_path.read_bytes()
    expected = int(np.prod(shape)) * 4
    if len(raw) != expected:
        raise DataError(f"{data_path} holds {len(raw)} bytes, header implies {expected}")
    return np.frombuffer(raw, dtype="<f4").reshape(shape).copy(), header


def save_model(stem: PathLike, model: VelocityModel) -> Path:
    """Store a model's squared slowness with its spacing."""
    return save_array(stem, model.slowness_sq, model.spacing)


def load_model(stem: PathLike, absorbing_width: Optional[int] = None) -> VelocityModel:
    """Read a model stored with save_model."""
    array, header = load_array(stem)
    if header.get("spacing") is None:
        raise DataError("model header carries no spacing")
    kwargs = {} if absorbing_width is None else {"absorbing_width": absorbing_width}
    return VelocityModel(array.astype(np.float64), tuple(header["spacing"]), **kwargs)
