"""
Source wavelet and time-axis helpers.
"""
import math

import numpy as np

from seisflow.core.errors import ArgumentError


def num_timesteps(record_time: float, dt: float) -> int:
    """
    Number of samples covering [0, record_time] at interval dt.

    Args:
        record_time: Recording length in seconds
        dt: Time step in seconds

    Returns:
        floor(record_time / dt) + 1
    """
    if record_time <= 0 or dt <= 0:
        raise ArgumentError("record_time and dt must be positive")
    # Tolerance absorbs representation error in ratios like 0.5 / 0.001
    return int(math.floor(record_time / dt + 1e-9)) + 1


def ricker(f0: float, dt: float, nt: int) -> np.ndarray:
    """
    Ricker wavelet delayed by 1/f0 and normalized to unit peak amplitude.

    Args:
        f0: Dominant frequency in Hz
        dt: Sampling interval in seconds
        nt: Number of samples

    Returns:
        Array of length nt
    """
    if f0 <= 0 or dt <= 0:
        raise ArgumentError(f"f0 and dt must be positive, got f0={f0}, dt={dt}")
    if nt < 1:
        raise ArgumentError("nt must be >= 1")
    t = np.arange(nt) * dt - 1.0 / f0
    arg = (np.pi * f0 * t) ** 2
    trace = (1.0 - 2.0 * arg) * np.exp(-arg)
    peak = np.max(np.abs(trace))
    return trace / peak if peak > 0 else trace
