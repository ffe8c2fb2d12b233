"""
Stochastic gradient descent building blocks.
"""
import logging
from typing import Callable, List

import numpy as np

from seisflow.core.errors import ArgumentError

# Configure logging
logger = logging.getLogger(__name__)

# Share of max|m| the trial step may change the model by
TRIAL_STEP_FRACTION = 0.05


def sample_batch(n_s: int, n_b: int, rng: np.random.Generator) -> List[int]:
    """
    Draw n_b distinct shot indices uniformly without replacement.

    Raises:
        ArgumentError: If n_b lies outside [1, n_s]
    """
    if not 1 <= n_b <= n_s:
        raise ArgumentError(f"batch size {n_b} must lie in [1, {n_s}]")
    return [int(i) for i in rng.choice(n_s, size=n_b, replace=False)]


def sgd_step(x: np.ndarray, g: np.ndarray, step_size: float) -> np.ndarray:
    """
    x - step_size * g, elementwise, in the dtype of x.

    Raises:
        ArgumentError: If the shapes differ or the step is negative
    """
    x = np.asarray(x)
    g = np.asarray(g)
    if x.shape != g.shape:
        raise ArgumentError(f"shape mismatch: x {x.shape}, g {g.shape}")
    if step_size < 0:
        raise ArgumentError("step_size must be non-negative")
    alpha = x.dtype.type(step_size)
    return (x - alpha * g.astype(x.dtype, copy=False)).astype(x.dtype, copy=False)


def estimate_step_size(
    x: np.ndarray,
    g: np.ndarray,
    phi0: float,
    objective: Callable[[np.ndarray], float],
    damping: float = 0.5,
) -> float:
    """
    Fixed step from a parabola fitted along -g.

    The objective is modeled as phi0 - a s + b s^2 with a = ||g||^2 and b
    taken from one trial evaluation at s0, whose update changes the model by
    5 % of max|x|. The returned step is ``damping`` times the parabola's
    minimizer, or s0 when the trial shows no curvature.

    Args:
        x: Current variable
        g: Gradient at x
        phi0: Objective at x
        objective: Objective of a candidate variable
        damping: Safety factor applied to the minimizer

    Returns:
        Step size
    """
    g64 = np.asarray(g, dtype=np.float64)
    g_max = float(np.max(np.abs(g64)))
    if g_max == 0.0:
        logger.warning("Zero gradient; step size set to 0")
        return 0.0
    a = float(np.sum(g64 * g64))
    s0 = TRIAL_STEP_FRACTION * float(np.max(np.abs(x))) / g_max
    phi1 = objective(sgd_step(x, g, s0))
    b = (phi1 - phi0 + a * s0) / (s0 * s0)
    if b <= 0:
        logger.warning("Trial step showed no curvature; using step %.3e", s0)
        return s0
    step = damping * a / (2.0 * b)
    logger.info("Estimated step size %.3e (trial %.3e, phi0 %.4e, phi1 %.4e)", step, s0, phi0, phi1)
    return step
