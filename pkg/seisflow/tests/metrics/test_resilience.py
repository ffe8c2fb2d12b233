"""
Tests for the resilience factor and the failure Monte Carlo.
"""
import unittest

import numpy as np

from seisflow.core.errors import ArgumentError
from seisflow.core.metrics.resilience import (
    FailureScenario,
    resilience_curve,
    resilience_factor,
    simulate_failures,
    time_to_solution,
)

TASK_S = 45 * 60.0
RUNTIMES = np.full(100, TASK_S)


class TestResilienceFactor(unittest.TestCase):
    """Test suite for resilience_factor."""

    def test_no_failure(self):
        self.assertEqual(resilience_factor(100.0, 100.0), 1.0)

    def test_failure_at_completion(self):
        """A task failing just before it ends runs twice plus the penalty."""
        self.assertAlmostEqual(resilience_factor(45.0, 45.0 + 2.0 + 45.0), 45.0 / 92.0)
        self.assertAlmostEqual(resilience_factor(45.0, 92.0), 0.489, places=3)

    def test_invalid(self):
        with self.assertRaises(ArgumentError):
            resilience_factor(0.0, 1.0)
        with self.assertRaises(ArgumentError):
            resilience_factor(1.0, -1.0)


class TestTimeToSolution(unittest.TestCase):
    """Test suite for the single-realization schedule."""

    def test_restart_on_same_worker(self):
        failures = np.array([0.5, np.nan])
        tts = time_to_solution(np.array([100.0, 100.0]), 2, failures, restart=True, penalty=20.0)
        self.assertEqual(tts, 50.0 + 20.0 + 100.0)

    def test_redistribution_discards_partial_work(self):
        failures = np.array([0.5, np.nan])
        tts = time_to_solution(np.array([100.0, 100.0]), 2, failures, restart=False, penalty=20.0)
        # the survivor picks the task up once it is free
        self.assertEqual(tts, 200.0)

    def test_every_worker_lost(self):
        failures = np.array([0.3, 0.7])
        self.assertIsNone(
            time_to_solution(np.array([100.0, 100.0]), 2, failures, restart=False, penalty=0.0)
        )


class TestSimulateFailures(unittest.TestCase):
    """Test suite for simulate_failures."""

    def test_no_failures(self):
        stats = simulate_failures(RUNTIMES, FailureScenario(0.0))
        self.assertEqual(stats.mean, 1.0)
        self.assertEqual(stats.std, 0.0)
        self.assertFalse(stats.infeasible)

    def test_all_tasks_fail_with_restarts(self):
        """With restarts the factor approaches one half for long tasks."""
        stats = simulate_failures(RUNTIMES, FailureScenario(1.0, restart=True, penalty=120.0, seed=1))
        self.assertEqual(len(stats.samples), 10)
        self.assertGreaterEqual(stats.mean, 0.45)
        self.assertLessEqual(stats.mean, 0.55)
        self.assertTrue(np.all((stats.samples > 0) & (stats.samples <= 1)))

    def test_without_restarts_non_increasing(self):
        fractions = [0.0, 0.1, 0.2, 0.4, 0.5, 0.6, 0.8, 0.9]
        curve = resilience_curve(RUNTIMES, fractions, restart=False, seed=4)
        means = curve["rf_mean"].tolist()
        for before, after in zip(means, means[1:]):
            self.assertLessEqual(after, before + 1e-12)
        self.assertFalse(curve["infeasible"].any())

    def test_all_workers_lost(self):
        stats = simulate_failures(RUNTIMES, FailureScenario(1.0, restart=False))
        self.assertTrue(stats.infeasible)
        self.assertEqual(stats.mean, 0.0)

    def test_fewer_workers(self):
        stats = simulate_failures(RUNTIMES[:20], FailureScenario(0.25, restart=True, seed=2), n_workers=5)
        self.assertGreater(stats.mean, 0.0)
        self.assertLess(stats.mean, 1.0)

    def test_seeded(self):
        scenario = FailureScenario(0.3, restart=True, seed=9)
        a = simulate_failures(RUNTIMES, scenario)
        b = simulate_failures(RUNTIMES, scenario)
        np.testing.assert_array_equal(a.samples, b.samples)

    def test_invalid_scenario(self):
        with self.assertRaises(ArgumentError):
            FailureScenario(1.5)
        with self.assertRaises(ArgumentError):
            FailureScenario(0.5, penalty=-1.0)
        with self.assertRaises(ArgumentError):
            FailureScenario(0.5, realizations=0)


if __name__ == "__main__":
    unittest.main()
