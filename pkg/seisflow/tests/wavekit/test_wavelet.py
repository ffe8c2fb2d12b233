"""
Tests for the source wavelet and time-axis helpers.
"""
import unittest

import numpy as np
from scipy.integrate import quad

from seisflow.core.errors import ArgumentError
from seisflow.core.wavekit.wavelet import num_timesteps, ricker


class TestRicker(unittest.TestCase):
    """Test suite for the Ricker wavelet."""

    def test_peak_is_one_at_delay(self):
        """The sample at round((1/f0)/dt) carries the unit peak."""
        f0, dt = 20.0, 1e-3
        trace = ricker(f0, dt, 500)
        t_peak = round((1.0 / f0) / dt)
        self.assertAlmostEqual(trace[t_peak], 1.0, places=12)
        self.assertAlmostEqual(np.max(np.abs(trace)), 1.0, places=12)
        self.assertEqual(int(np.argmax(trace)), t_peak)

    def test_decays_far_from_peak(self):
        """Far from the peak the wavelet vanishes."""
        trace = ricker(20.0, 1e-3, 1000)
        self.assertLess(abs(trace[400]), 1e-6)
        self.assertLess(abs(trace[-1]), 1e-6)

    def test_sum_matches_quadrature(self):
        """Riemann sum of the samples matches quadrature of the closed form."""
        f0, dt, nt = 20.0, 1e-3, 500
        trace = ricker(f0, dt, nt)

        def closed_form(t):
            arg = (np.pi * f0 * (t - 1.0 / f0)) ** 2
            return (1.0 - 2.0 * arg) * np.exp(-arg)

        expected, _ = quad(closed_form, 0.0, nt * dt, points=[1.0 / f0], limit=200)
        self.assertAlmostEqual(float(np.sum(trace) * dt), expected, delta=1e-5)

    def test_length(self):
        """Output has nt samples."""
        self.assertEqual(ricker(10.0, 2e-3, 17).shape, (17,))

    def test_invalid_arguments(self):
        """Non-positive frequency or sampling raises."""
        with self.assertRaises(ArgumentError):
            ricker(0.0, 1e-3, 10)
        with self.assertRaises(ArgumentError):
            ricker(10.0, -1e-3, 10)


class TestNumTimesteps(unittest.TestCase):
    """Test suite for num_timesteps."""

    def test_known_values(self):
        """floor(T/dt) + 1 for representative inputs."""
        self.assertEqual(num_timesteps(12.0, 0.55e-3), 21819)
        self.assertEqual(num_timesteps(1.0, 1.0), 2)
        self.assertEqual(num_timesteps(0.5, 0.001), 501)

    def test_invalid(self):
        """Non-positive inputs raise."""
        with self.assertRaises(ArgumentError):
            num_timesteps(0.0, 1e-3)


if __name__ == "__main__":
    unittest.main()
