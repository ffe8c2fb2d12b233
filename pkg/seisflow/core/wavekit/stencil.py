"""
Central finite-difference stencils for the 2D Laplacian.

Fields are stored with a halo of ``radius = order // 2`` zero cells on every
side, so the discrete Laplacian is a symmetric operator on the interior.
Rows of the interior can be split into tiles evaluated on a thread pool;
each tile writes a disjoint band of the output so results do not depend on
scheduling.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Optional, Tuple

import numpy as np

from seisflow.core.constants import CFL_COEFFICIENTS
from seisflow.core.errors import ArgumentError

# Configure logging
logger = logging.getLogger(__name__)

# Second-derivative weights (center first) per spatial order
SECOND_DERIVATIVE_WEIGHTS: Dict[int, Tuple[float, ...]] = {
    2: (-2.0, 1.0),
    4: (-5.0 / 2.0, 4.0 / 3.0, -1.0 / 12.0),
    6: (-49.0 / 18.0, 3.0 / 2.0, -3.0 / 20.0, 1.0 / 90.0),
    8: (-205.0 / 72.0, 8.0 / 5.0, -1.0 / 5.0, 8.0 / 315.0, -1.0 / 560.0),
}


def stencil_weights(spatial_order: int) -> Tuple[float, ...]:
    """Second-derivative weights for an even spatial order."""
    if spatial_order not in SECOND_DERIVATIVE_WEIGHTS:
        raise ArgumentError(
            f"unsupported spatial order {spatial_order}, "
            f"expected one of {sorted(SECOND_DERIVATIVE_WEIGHTS)}"
        )
    return SECOND_DERIVATIVE_WEIGHTS[spatial_order]


def cfl_coefficient(spatial_order: int) -> float:
    """Stored stable CFL coefficient for a spatial order."""
    stencil_weights(spatial_order)
    return CFL_COEFFICIENTS[spatial_order]


def theoretical_cfl_limit(spatial_order: int) -> float:
    """
    Von Neumann limit of dt * v / h for leapfrog time stepping on a square grid.

    The stencil symbol peaks at the Nyquist wavenumber, where it equals
    |w0 + 2 * sum_k w_k (-1)^k|.
    """
    weights = stencil_weights(spatial_order)
    symbol = abs(weights[0] + 2.0 * sum(w * (-1) ** k for k, w in enumerate(weights) if k > 0))
    return 2.0 / math.sqrt(2.0 * symbol)


def row_tiles(n_rows: int, n_tiles: int) -> List[Tuple[int, int]]:
    """Split ``n_rows`` into at most ``n_tiles`` contiguous bands."""
    n_tiles = max(1, min(n_tiles, n_rows))
    edges = np.linspace(0, n_rows, n_tiles + 1).round().astype(int)
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]


class Laplacian:
    """
    Tiled 2D Laplacian for fields carrying a zero halo.

    Args:
        interior_shape: (N, M) cells updated by the stencil
        spacing: (dz, dx) in meters
        spatial_order: Even accuracy order
        threads: Number of row tiles evaluated concurrently
    """

    def __init__(
        self,
        interior_shape: Tuple[int, int],
        spacing: Tuple[float, float],
        spatial_order: int,
        threads: int = 1,
    ):
        self.weights = stencil_weights(spatial_order)
        self.radius = spatial_order // 2
        self.shape = interior_shape
        self.inv_dz2 = 1.0 / spacing[0] ** 2
        self.inv_dx2 = 1.0 / spacing[1] ** 2
        self.tiles = row_tiles(interior_shape[0], threads)
        self._executor: Optional[ThreadPoolExecutor] = (
            ThreadPoolExecutor(max_workers=len(self.tiles)) if len(self.tiles) > 1 else None
        )

    def close(self) -> None:
        if self._executor is not None:
            self._executor.shutdown(wait=True)
            self._executor = None

    def _apply_tile(self, field: np.ndarray, out: np.ndarray, rows: Tuple[int, int]) -> None:
        r = self.radius
        nx = self.shape[1]
        z0, z1 = rows[0] + r, rows[1] + r
        w = self.weights
        acc = (w[0] * (self.inv_dz2 + self.inv_dx2)) * field[z0:z1, r : r + nx]
        for k in range(1, r + 1):
            acc += (w[k] * self.inv_dz2) * (
                field[z0 - k : z1 - k, r : r + nx] + field[z0 + k : z1 + k, r : r + nx]
            )
            acc += (w[k] * self.inv_dx2) * (
                field[z0:z1, r - k : r + nx - k] + field[z0:z1, r + k : r + nx + k]
            )
        out[rows[0] : rows[1]] = acc

    def apply(self, field: np.ndarray, out: np.ndarray) -> np.ndarray:
        """
        Evaluate the Laplacian of a haloed field into ``out`` (interior shape).

        Args:
            field: (N + 2r, M + 2r) array with zero halo
            out: (N, M) output buffer

        Returns:
            out
        """
        if self._executor is None:
            self._apply_tile(field, out, self.tiles[0])
        else:
            futures = [
                self._executor.submit(self._apply_tile, field, out, rows) for rows in self.tiles
            ]
            for future in futures:
                future.result()
        return out


def calibrate_cfl_coefficient(
    spatial_order: int,
    n: int = 41,
    steps: int = 400,
    iterations: int = 14,
    growth_threshold: float = 1e3,
    seed: int = 0,
) -> float:
    """
    Largest stable dt * v / h found by bisection on a constant reference model.

    A random initial field excites every wavenumber; a trial coefficient is
    unstable when the field grows by more than ``growth_threshold`` within
    ``steps`` undamped leapfrog steps.

    Args:
        spatial_order: Even accuracy order
        n: Reference grid size (n x n, unit spacing and velocity)
        steps: Time steps per trial
        iterations: Bisection iterations
        growth_threshold: Growth factor that marks a trial as unstable
        seed: Seed for the initial field

    Returns:
        Empirical stability limit of the CFL coefficient
    """
    laplacian = Laplacian((n, n), (1.0, 1.0), spatial_order)
    r = laplacian.radius
    rng = np.random.default_rng(seed)
    initial = rng.standard_normal((n, n))
    lap = np.empty((n, n))

    def is_stable(coefficient: float) -> bool:
        dt2 = coefficient**2
        prev = np.zeros((n + 2 * r, n + 2 * r))
        cur = np.zeros_like(prev)
        cur[r : r + n, r : r + n] = initial
        prev[r : r + n, r : r + n] = initial
        with np.errstate(over="ignore", invalid="ignore"):
            for _ in range(steps):
                laplacian.apply(cur, lap)
                nxt = np.zeros_like(cur)
                nxt[r : r + n, r : r + n] = (
                    2.0 * cur[r : r + n, r : r + n] - prev[r : r + n, r : r + n] + dt2 * lap
                )
                prev, cur = cur, nxt
                peak = np.max(np.abs(cur))
                if not np.isfinite(peak) or peak > growth_threshold * np.max(np.abs(initial)):
                    return False
        return True

    low, high = 0.1, 1.0
    for _ in range(iterations):
        mid = 0.5 * (low + high)
        if is_stable(mid):
            low = mid
        else:
            high = mid
    logger.debug("Calibrated CFL coefficient for order %d: %.4f", spatial_order, low)
    return low
