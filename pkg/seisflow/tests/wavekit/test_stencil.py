"""
Tests for the Laplacian stencils and the CFL table.
"""
import unittest

import numpy as np

from seisflow.core.errors import ArgumentError
from seisflow.core.wavekit.stencil import (
    SECOND_DERIVATIVE_WEIGHTS,
    Laplacian,
    calibrate_cfl_coefficient,
    cfl_coefficient,
    row_tiles,
    stencil_weights,
    theoretical_cfl_limit,
)


class TestStencilWeights(unittest.TestCase):
    """Test suite for the finite-difference weights."""

    def test_weights_annihilate_constants(self):
        """Each second-derivative stencil sums to zero."""
        for order, weights in SECOND_DERIVATIVE_WEIGHTS.items():
            total = weights[0] + 2.0 * sum(weights[1:])
            self.assertAlmostEqual(total, 0.0, places=12, msg=f"order {order}")

    def test_weights_reproduce_quadratic(self):
        """The stencil differentiates x^2 exactly."""
        for order, weights in SECOND_DERIVATIVE_WEIGHTS.items():
            second = 2.0 * sum(w * k * k for k, w in enumerate(weights) if k > 0)
            self.assertAlmostEqual(second, 2.0, places=12, msg=f"order {order}")

    def test_unsupported_order(self):
        """Odd or unknown orders are rejected."""
        with self.assertRaises(ArgumentError):
            stencil_weights(3)
        with self.assertRaises(ArgumentError):
            cfl_coefficient(10)

    def test_theoretical_limits(self):
        """Von Neumann limits match their known values."""
        expected = {2: 0.7071, 4: 0.6124, 6: 0.5752, 8: 0.5546}
        for order, limit in expected.items():
            self.assertAlmostEqual(theoretical_cfl_limit(order), limit, places=3)

    def test_stored_coefficients_below_limit(self):
        """The stored table stays under the theoretical limit."""
        for order in SECOND_DERIVATIVE_WEIGHTS:
            self.assertLess(cfl_coefficient(order), theoretical_cfl_limit(order))


class TestCalibration(unittest.TestCase):
    """Test suite for the empirical CFL calibration."""

    def test_calibrated_limit_brackets_table(self):
        """stored <= calibrated <= 1.05 * theoretical for every order."""
        for order in sorted(SECOND_DERIVATIVE_WEIGHTS):
            calibrated = calibrate_cfl_coefficient(order)
            self.assertGreaterEqual(calibrated, cfl_coefficient(order), msg=f"order {order}")
            self.assertLessEqual(
                calibrated, 1.05 * theoretical_cfl_limit(order), msg=f"order {order}"
            )


class TestLaplacian(unittest.TestCase):
    """Test suite for the tiled Laplacian."""

    def _haloed(self, interior, radius):
        field = np.zeros((interior.shape[0] + 2 * radius, interior.shape[1] + 2 * radius))
        field[radius:-radius, radius:-radius] = interior
        return field

    def test_quadratic_field(self):
        """Away from the halo the Laplacian of z^2 + x^2 is 4."""
        n, h = 40, 2.0
        z, x = np.meshgrid(np.arange(n) * h, np.arange(n) * h, indexing="ij")
        lap = Laplacian((n, n), (h, h), 8)
        out = lap.apply(self._haloed(z**2 + x**2, 4), np.empty((n, n)))
        np.testing.assert_allclose(out[4:-4, 4:-4], 4.0, rtol=1e-9)

    def test_tiling_does_not_change_result(self):
        """Threaded tiles reproduce the single-tile result exactly."""
        rng = np.random.default_rng(3)
        interior = rng.standard_normal((37, 29))
        field = self._haloed(interior, 4)
        single = Laplacian((37, 29), (5.0, 7.0), 8, threads=1)
        tiled = Laplacian((37, 29), (5.0, 7.0), 8, threads=4)
        try:
            a = single.apply(field, np.empty((37, 29)))
            b = tiled.apply(field, np.empty((37, 29)))
        finally:
            tiled.close()
        np.testing.assert_array_equal(a, b)

    def test_operator_is_symmetric(self):
        """<L a, b> == <a, L b> on zero-halo fields."""
        rng = np.random.default_rng(11)
        a = rng.standard_normal((25, 31))
        b = rng.standard_normal((25, 31))
        lap = Laplacian((25, 31), (10.0, 10.0), 4)
        la = lap.apply(self._haloed(a, 2), np.empty_like(a))
        lb = lap.apply(self._haloed(b, 2), np.empty_like(b))
        self.assertAlmostEqual(float(np.sum(la * b)), float(np.sum(a * lb)), places=9)

    def test_row_tiles_cover_rows(self):
        """Tiles partition the rows without gaps."""
        tiles = row_tiles(10, 3)
        self.assertEqual(tiles[0][0], 0)
        self.assertEqual(tiles[-1][1], 10)
        for (_, end), (start, _) in zip(tiles, tiles[1:]):
            self.assertEqual(end, start)
        self.assertEqual(len(row_tiles(2, 8)), 2)


if __name__ == "__main__":
    unittest.main()
