"""
Tests for the imaging objective.
"""
import unittest

import numpy as np

from seisflow.core.errors import ArgumentError
from seisflow.core.imaging.objective import ImagingOptions, evaluate_shot, misfit, shot_gradient, total_misfit
from seisflow.core.imaging.survey import problem_from_dict
from seisflow.core.wavekit.grid import SaveMode
from seisflow.tests.helpers import tiny_problem_dict


class TestImagingOptions(unittest.TestCase):
    """Test suite for ImagingOptions validation."""

    def test_defaults(self):
        options = ImagingOptions()
        self.assertIsNone(options.aperture)
        self.assertEqual(options.save_mode.kind, "full")

    def test_invalid(self):
        with self.assertRaises(ArgumentError):
            ImagingOptions(aperture=0.0)
        with self.assertRaises(ArgumentError):
            ImagingOptions(mute_depth=-1.0)
        with self.assertRaises(ArgumentError):
            ImagingOptions(save_mode=SaveMode.none())


class TestObjective(unittest.TestCase):
    """Test suite for misfits and shot gradients."""

    @classmethod
    def setUpClass(cls):
        cls.problem = problem_from_dict(tiny_problem_dict())
        cls.survey = cls.problem.survey
        cls.options = cls.problem.config.options
        cls.initial = cls.problem.config.initial_model

    def test_zero_misfit_at_true_model(self):
        """Observed data come from the same kernel, so the true model fits exactly."""
        for shot in self.survey.shots:
            self.assertEqual(misfit(self.survey.model_true, shot, self.options), 0.0)

    def test_zero_gradient_at_true_model(self):
        for shot in self.survey.shots:
            grad = shot_gradient(self.survey.model_true, shot, options=self.options)
            np.testing.assert_array_equal(grad, 0.0)

    def test_gradient_independent_of_save_mode(self):
        """Checkpointed and fully stored wavefields give the same windowed, muted gradient."""
        options = ImagingOptions(aperture=1000.0, mute_depth=40.0, settings=self.options.settings)
        shot = self.survey.shots[1]
        reference = shot_gradient(self.initial, shot, SaveMode.full(), options)
        for k in (3, 7):
            grad = shot_gradient(self.initial, shot, SaveMode.every(k), options)
            error = np.linalg.norm(grad - reference) / np.linalg.norm(reference)
            self.assertLess(error, 1e-6, msg=f"interval {k}")

    def test_positive_misfit_at_initial_model(self):
        self.assertGreater(total_misfit(self.initial, self.survey.shots, self.options), 0.0)

    def test_gradient_shape_and_mute(self):
        shot = self.survey.shots[1]
        phi, grad = evaluate_shot(self.initial, shot, self.options)
        self.assertEqual(grad.shape, self.initial.shape)
        self.assertGreater(phi, 0.0)
        # rows above 40 m are zeroed
        self.assertTrue(np.all(grad[:4] == 0.0))
        self.assertGreater(np.abs(grad[4:]).max(), 0.0)
        self.assertAlmostEqual(phi, misfit(self.initial, shot, self.options), delta=1e-9 * phi)

    def test_descent_direction(self):
        """A small step along -g lowers the shot misfit."""
        shot = self.survey.shots[2]
        phi, grad = evaluate_shot(self.initial, shot, self.options)
        x = self.initial.slowness_sq
        step = 1e-3 * np.abs(x).max() / np.abs(grad).max()
        phi_new = misfit(self.initial.with_slowness(x - step * grad), shot, self.options)
        self.assertLess(phi_new, phi)

    def test_windowed_gradient_embeds_in_full_grid(self):
        options = ImagingOptions(aperture=1000.0, mute_depth=0.0, settings=self.options.settings)
        shot = self.survey.shots[0]
        grad = shot_gradient(self.initial, shot, options=options)
        self.assertEqual(grad.shape, self.initial.shape)
        xs = np.arange(self.initial.shape[1]) * self.initial.spacing[1]
        outside = np.abs(xs - shot.geometry.source_pos[1]) > 500.0 + 1e-6
        self.assertTrue(outside.any())
        self.assertTrue(np.all(grad[:, outside] == 0.0))
        self.assertGreater(np.abs(grad[:, ~outside]).max(), 0.0)


if __name__ == "__main__":
    unittest.main()
