"""
Tests for forward modeling, the data-to-source adjoint and the gradient.
"""
import math
import threading
import unittest

import numpy as np

from seisflow.core.errors import ArgumentError, NumericalInstabilityError
from seisflow.core.wavekit.grid import (
    AcquisitionGeometry,
    SaveMode,
    ShotRecord,
    VelocityModel,
    two_layer_model,
)
from seisflow.core.wavekit.propagator import (
    PropagatorSettings,
    adjoint_forward,
    adjoint_gradient,
    fold_padding,
    forward,
    stable_dt,
)
from seisflow.core.wavekit.wavelet import num_timesteps, ricker
from seisflow.tests.helpers import F64, constant_model, layered_model, surface_geometry


class TestForward(unittest.TestCase):
    """Test suite for forward modeling."""

    def test_record_shape_and_dtype(self):
        """Records have (num_timesteps, n_receivers) float64 samples."""
        model = constant_model(n=61, absorbing_width=10)
        geometry = surface_geometry(model, record_time=0.2)
        dt = stable_dt(model)
        record, handle = forward(model, geometry, ricker(15.0, dt, 500))
        self.assertEqual(record.data.shape, (num_timesteps(0.2, dt), geometry.n_receivers))
        self.assertEqual(record.data.dtype, np.float64)
        self.assertEqual(handle.n_stored, record.nt)

    def test_outside_positions_rejected(self):
        """A receiver outside the model is an argument error."""
        model = constant_model(n=41, absorbing_width=5)
        geometry = AcquisitionGeometry((20.0, 200.0), [(20.0, 5000.0)], 0.1, 15.0)
        with self.assertRaises(ArgumentError):
            forward(model, geometry, np.zeros(1000))

    def test_short_wavelet_rejected(self):
        """The wavelet must cover every time step."""
        model = constant_model(n=41, absorbing_width=5)
        geometry = surface_geometry(model, record_time=0.1)
        with self.assertRaises(ArgumentError):
            forward(model, geometry, np.zeros(3))

    def test_first_arrival_times(self):
        """Direct-wave peaks follow offset / velocity plus the wavelet delay."""
        v, h, f0 = 2000.0, 5.0, 15.0
        model = constant_model(n=201, velocity=v, spacing=h, absorbing_width=20)
        geometry = AcquisitionGeometry(
            (500.0, 200.0), [(500.0, 500.0), (500.0, 800.0)], 0.6, f0
        )
        dt = stable_dt(model)
        record, _ = forward(
            model, geometry, ricker(f0, dt, 1000), save_mode=SaveMode.none(),
            settings=PropagatorSettings(precision=F64),
        )
        peaks = [int(np.argmax(np.abs(record.data[:, i]))) * dt for i in range(2)]
        for offset, peak in zip((300.0, 600.0), peaks):
            self.assertLess(abs(peak - (offset / v + 1.0 / f0)), 1.0 / f0)
        self.assertLess(abs((peaks[1] - peaks[0]) - 300.0 / v), 0.01)

    def test_long_run_decays(self):
        """At the stable step a long run stays bounded and decays in the sponge."""
        model = constant_model(n=101, absorbing_width=20)
        dt = stable_dt(model)
        geometry = surface_geometry(model, depth=500.0, record_time=999 * dt)
        record, _ = forward(model, geometry, ricker(15.0, dt, 1000), save_mode=SaveMode.none())
        self.assertEqual(record.nt, 1000)
        self.assertTrue(np.all(np.isfinite(record.data)))
        peak = np.max(np.abs(record.data))
        self.assertLess(np.max(np.abs(record.data[-100:])), peak)

    def test_oversized_step_is_unstable(self):
        """Marching at 1.2 times the stable step blows up and reports the step."""
        model = constant_model(n=101, absorbing_width=20)
        dt = 1.2 * stable_dt(model)
        geometry = surface_geometry(model, depth=500.0, record_time=999 * dt)
        with self.assertRaises(NumericalInstabilityError) as ctx:
            forward(model, geometry, ricker(15.0, dt, 1000), save_mode=SaveMode.none(), dt=dt)
        self.assertGreater(ctx.exception.step, 0)

    def test_zero_wavelet_gives_silent_record(self):
        """No source energy, no recorded data."""
        model = layered_model()
        geometry = surface_geometry(model, record_time=0.2)
        record, _ = forward(
            model, geometry, np.zeros(500), save_mode=SaveMode.none(),
            settings=PropagatorSettings(precision=F64),
        )
        np.testing.assert_array_equal(record.data, 0.0)

    def test_linear_in_wavelet(self):
        """Doubling the wavelet doubles the record."""
        settings = PropagatorSettings(precision=F64)
        model = layered_model()
        geometry = surface_geometry(model, record_time=0.2)
        dt = stable_dt(model)
        wavelet = ricker(15.0, dt, 500)
        once, _ = forward(model, geometry, wavelet, SaveMode.none(), dt, settings)
        twice, _ = forward(model, geometry, 2.0 * wavelet, SaveMode.none(), dt, settings)
        np.testing.assert_allclose(
            twice.data, 2.0 * once.data, rtol=0, atol=1e-13 * np.max(np.abs(once.data))
        )

    def test_unstable_runs_release_worker_threads(self):
        """A run that blows up shuts down its stencil thread pool."""
        model = constant_model(n=101, absorbing_width=20)
        dt = 1.2 * stable_dt(model)
        geometry = surface_geometry(model, depth=500.0, record_time=999 * dt)
        settings = PropagatorSettings(threads=4)
        baseline = threading.active_count()
        for _ in range(5):
            with self.assertRaises(NumericalInstabilityError):
                forward(
                    model, geometry, ricker(15.0, dt, 1000), save_mode=SaveMode.none(),
                    dt=dt, settings=settings,
                )
        self.assertLessEqual(threading.active_count(), baseline)

    def test_random_models_are_stable(self):
        """Random heterogeneous models march without blowing up at stable_dt."""
        rng = np.random.default_rng(2024)
        for trial in range(50):
            velocity = rng.uniform(1500.0, 4500.0, size=(31, 31))
            model = VelocityModel.from_velocity(velocity, (10.0, 10.0), absorbing_width=5)
            dt = stable_dt(model)
            geometry = AcquisitionGeometry(
                (150.0, 150.0), [(20.0, 50.0), (20.0, 250.0)], 149 * dt, 20.0
            )
            record, _ = forward(model, geometry, ricker(20.0, dt, 150), save_mode=SaveMode.none())
            self.assertEqual(record.nt, 150, msg=f"trial {trial}")
            self.assertTrue(np.all(np.isfinite(record.data)), msg=f"trial {trial}")


class TestAdjointForward(unittest.TestCase):
    """Test suite for the data-to-source adjoint."""

    def test_dot_product(self):
        """<F q, y> matches <q, F^T y> to round-off."""
        model = constant_model(n=101, absorbing_width=20)
        geometry = surface_geometry(model, record_time=0.3)
        settings = PropagatorSettings(precision=F64)
        dt = stable_dt(model)
        nt = num_timesteps(0.3, dt)
        for seed in range(10):
            rng = np.random.default_rng(seed)
            q = rng.standard_normal(nt)
            y = rng.standard_normal((nt, geometry.n_receivers))
            record, _ = forward(model, geometry, q, save_mode=SaveMode.none(), settings=settings)
            back = adjoint_forward(model, geometry, ShotRecord(geometry, dt, y), settings=settings)
            lhs = float(np.sum(record.data * y))
            rhs = float(np.dot(q, back))
            scale = np.linalg.norm(record.data) * np.linalg.norm(y)
            self.assertLess(abs(lhs - rhs) / scale, 1e-10, msg=f"seed {seed}")

    def test_zero_residual_gives_zero_trace(self):
        """The adjoint of a zero residual is a zero source trace."""
        model = layered_model()
        geometry = surface_geometry(model, record_time=0.2)
        dt = stable_dt(model)
        residual = ShotRecord(geometry, dt, np.zeros((num_timesteps(0.2, dt), geometry.n_receivers)))
        back = adjoint_forward(model, geometry, residual, settings=PropagatorSettings(precision=F64))
        np.testing.assert_array_equal(back, 0.0)

    def test_threaded_adjoint_releases_worker_threads(self):
        """The adjoint closes its thread pool when it returns."""
        model = layered_model()
        geometry = surface_geometry(model, record_time=0.1)
        dt = stable_dt(model)
        y = np.random.default_rng(0).standard_normal((num_timesteps(0.1, dt), geometry.n_receivers))
        baseline = threading.active_count()
        adjoint_forward(model, geometry, ShotRecord(geometry, dt, y), settings=PropagatorSettings(threads=4))
        self.assertLessEqual(threading.active_count(), baseline)

    def test_mismatched_geometry(self):
        """A residual recorded elsewhere is rejected."""
        model = constant_model(n=41, absorbing_width=5)
        geometry = surface_geometry(model, record_time=0.1)
        other = surface_geometry(model, source_x=100.0, record_time=0.1)
        dt = stable_dt(model)
        residual = ShotRecord(other, dt, np.zeros((num_timesteps(0.1, dt), other.n_receivers)))
        with self.assertRaises(ArgumentError):
            adjoint_forward(model, geometry, residual)


class TestGradient(unittest.TestCase):
    """Test suite for the adjoint-state gradient."""

    def _objective(self, model, geometry, wavelet, observed, dt, settings):
        record, _ = forward(model, geometry, wavelet, SaveMode.none(), dt, settings)
        return 0.5 * float(np.sum((record.data - observed.data) ** 2))

    def test_taylor_expansion(self):
        """First-order Taylor remainder decreases quadratically."""
        settings = PropagatorSettings(precision=F64)
        true_model = two_layer_model((201, 201), (10.0, 10.0), 2000.0, 2500.0, 600.0, 20)
        m0 = constant_model(n=201, velocity=2000.0, spacing=10.0, absorbing_width=20)
        geometry = surface_geometry(true_model, receiver_step=4, record_time=0.8, f0=15.0)
        dt = 0.9 * stable_dt(true_model)
        wavelet = ricker(15.0, dt, 1000)
        observed, _ = forward(true_model, geometry, wavelet, SaveMode.none(), dt, settings)

        record, handle = forward(m0, geometry, wavelet, SaveMode.full(), dt, settings)
        residual = record.with_data(record.data - observed.data)
        phi0 = 0.5 * float(np.sum(residual.data**2))
        grad = adjoint_gradient(m0, handle, residual)

        z, x = np.meshgrid(np.arange(201) * 10.0, np.arange(201) * 10.0, indexing="ij")
        bump = np.exp(-((z - 400.0) ** 2 + (x - 1000.0) ** 2) / (2 * 150.0**2))
        dm = 0.01 * m0.slowness_sq * bump
        slope = float(np.sum(grad * dm))

        errors = []
        for h in (1.0, 0.5, 0.25, 0.125):
            perturbed = m0.with_slowness(m0.slowness_sq + h * dm)
            phi = self._objective(perturbed, geometry, wavelet, observed, dt, settings)
            errors.append(abs(phi - phi0 - h * slope))
        for a, b in zip(errors, errors[1:]):
            self.assertGreaterEqual(a / b, 3.5)
            self.assertLessEqual(a / b, 4.5)

    def test_checkpointing_matches_full_storage(self):
        """Interval checkpoints reproduce the full-storage gradient."""
        settings = PropagatorSettings(precision=F64)
        model = layered_model()
        geometry = surface_geometry(model, receiver_step=3, record_time=0.25)
        dt = stable_dt(model)
        wavelet = ricker(15.0, dt, 500)
        record, full = forward(model, geometry, wavelet, SaveMode.full(), dt, settings)
        residual = record.with_data(np.random.default_rng(5).standard_normal(record.data.shape))
        reference = adjoint_gradient(model, full, residual)
        for k in (2, 5, 10):
            _, handle = forward(model, geometry, wavelet, SaveMode.every(k), dt, settings)
            self.assertEqual(handle.n_stored, math.ceil(record.nt / k))
            np.testing.assert_allclose(
                adjoint_gradient(model, handle, residual), reference, rtol=1e-10,
                atol=1e-12 * np.max(np.abs(reference)),
            )

    def test_zero_residual_gives_zero_gradient(self):
        """A perfect data fit has a zero gradient."""
        settings = PropagatorSettings(precision=F64)
        model = layered_model()
        geometry = surface_geometry(model, record_time=0.2)
        dt = stable_dt(model)
        record, handle = forward(model, geometry, ricker(15.0, dt, 500), SaveMode.full(), dt, settings)
        grad = adjoint_gradient(model, handle, record.with_data(np.zeros_like(record.data)))
        np.testing.assert_array_equal(grad, 0.0)

    def test_gradient_shape(self):
        """The gradient lives on the unpadded model grid."""
        model = layered_model(shape=(41, 53))
        geometry = surface_geometry(model, record_time=0.15)
        dt = stable_dt(model)
        record, handle = forward(model, geometry, ricker(15.0, dt, 500), dt=dt)
        grad = adjoint_gradient(model, handle, record)
        self.assertEqual(grad.shape, (41, 53))
        self.assertEqual(grad.dtype, np.float64)

    def test_requires_stored_wavefield(self):
        """A misfit-only handle cannot produce a gradient."""
        model = constant_model(n=41, absorbing_width=5)
        geometry = surface_geometry(model, record_time=0.1)
        record, handle = forward(
            model, geometry, ricker(15.0, stable_dt(model), 500), save_mode=SaveMode.none()
        )
        with self.assertRaises(ArgumentError):
            adjoint_gradient(model, handle, record)

    def test_sampling_mismatch(self):
        """A residual with another length is rejected."""
        model = constant_model(n=41, absorbing_width=5)
        geometry = surface_geometry(model, record_time=0.1)
        dt = stable_dt(model)
        _, handle = forward(model, geometry, ricker(15.0, dt, 500))
        longer = AcquisitionGeometry(
            geometry.source_pos, geometry.receiver_pos, 0.2, geometry.f0
        )
        residual = ShotRecord(longer, dt, np.zeros((num_timesteps(0.2, dt), geometry.n_receivers)))
        with self.assertRaises(ArgumentError):
            adjoint_gradient(model, handle, residual)


class TestFoldPadding(unittest.TestCase):
    """Test suite for the padding adjoint."""

    def test_is_adjoint_of_edge_padding(self):
        """<pad(a), b> == <a, fold(b)>."""
        rng = np.random.default_rng(1)
        a = rng.standard_normal((7, 9))
        b = rng.standard_normal((13, 15))
        lhs = float(np.sum(np.pad(a, 3, mode="edge") * b))
        rhs = float(np.sum(a * fold_padding(b, 3)))
        self.assertAlmostEqual(lhs, rhs, places=10)

    def test_zero_width(self):
        """Zero width is the identity."""
        b = np.arange(12.0).reshape(3, 4)
        np.testing.assert_array_equal(fold_padding(b, 0), b)


if __name__ == "__main__":
    unittest.main()
