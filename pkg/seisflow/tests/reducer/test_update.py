"""
Tests for the model update that closes an iteration.
"""
import unittest

import numpy as np

from seisflow.core.cloudsim.storage import ObjectStore
from seisflow.core.cloudsim.world import SimWorld
from seisflow.core.errors import ProtocolError
from seisflow.core.imaging.optimizer import sgd_step
from seisflow.core.reducer.chunking import model_key, plan_chunks
from seisflow.core.reducer.driver import attach_reducers, publish_gradient
from seisflow.core.reducer.handler import GradientReducer
from seisflow.core.reducer.update import ModelUpdater, finalize_update


def _store_chunks(store, plan, g, n_b=4):
    keys = []
    for chunk, values in enumerate(plan.split(g)):
        key = f"g/c{chunk}"
        store.put_array(key, values, {"count": n_b, "n_b": n_b})
        keys.append(key)
    return keys


class TestFinalizeUpdate(unittest.TestCase):
    """Test suite for finalize_update."""

    def setUp(self):
        rng = np.random.default_rng(0)
        self.store = ObjectStore()
        self.x = rng.uniform(1e-7, 4e-7, (6, 5)).astype(np.float32)
        self.g = rng.standard_normal((6, 5)).astype(np.float32)
        self.store.put_array("x", self.x)

    def test_zero_step_keeps_bytes(self):
        keys = _store_chunks(self.store, plan_chunks(30, 7), self.g)
        new = finalize_update(self.store, "x", keys, 0.0)
        self.assertEqual(new, "x/next")
        self.assertEqual(self.store.get(new), self.store.get("x"))

    def test_chunked_equals_whole(self):
        step = 1e-8
        chunked = finalize_update(self.store, "x", _store_chunks(self.store, plan_chunks(30, 7), self.g), step, "a")
        whole = finalize_update(self.store, "x", _store_chunks(self.store, plan_chunks(30, 30), self.g), step, "b")
        np.testing.assert_array_equal(self.store.get_array(chunked), self.store.get_array(whole))
        np.testing.assert_array_equal(self.store.get_array(whole), sgd_step(self.x, self.g, step))
        self.assertEqual(self.store.get_array(whole).shape, (6, 5))

    def test_records_gradient_norm(self):
        new = finalize_update(self.store, "x", _store_chunks(self.store, plan_chunks(30, 30), self.g), 1.0)
        norm = np.linalg.norm(self.g.astype(np.float64))
        self.assertAlmostEqual(self.store.head(new)["grad_norm"], norm, places=9)

    def test_missing_chunk(self):
        keys = _store_chunks(self.store, plan_chunks(30, 7), self.g)
        self.store.delete(keys[2])
        with self.assertRaises(ProtocolError):
            finalize_update(self.store, "x", keys, 1.0)

    def test_incomplete_chunk(self):
        keys = _store_chunks(self.store, plan_chunks(30, 30), self.g)
        self.store.put_array(keys[0], self.g, {"count": 3, "n_b": 4})
        with self.assertRaises(ProtocolError):
            finalize_update(self.store, "x", keys, 1.0)

    def test_size_mismatch(self):
        self.store.put_array("short", np.ones(7), {"count": 1, "n_b": 1})
        with self.assertRaises(ProtocolError):
            finalize_update(self.store, "x", ["short"], 1.0)

    def test_no_chunks(self):
        with self.assertRaises(ProtocolError):
            finalize_update(self.store, "x", [], 1.0)


class TestModelUpdater(unittest.TestCase):
    """Test suite for the update triggered by the last terminal chunk."""

    def test_update_runs_after_last_chunk(self):
        plan = plan_chunks(12, 5)
        world = SimWorld(seed=1)
        x = np.full(12, 2.0, dtype=np.float32)
        world.store.put_array(model_key(0), x)
        updater = ModelUpdater(plan, step_size=0.5)
        attach_reducers(world, plan, GradientReducer(updater=updater))
        grads = [np.ones(12, dtype=np.float32), np.full(12, 3.0, dtype=np.float32)]
        for position, g in enumerate(grads):
            publish_gradient(world, plan, g, shot=position, position=position, n_b=2)

        world.run_until(600.0)

        self.assertEqual(len(updater.invocations), 1)
        self.assertEqual(updater.invocations[0].status, "ok")
        np.testing.assert_array_equal(world.store.get_array(model_key(1)), np.zeros(12, dtype=np.float32))
        self.assertEqual(world.store.list("grad/"), [])
        self.assertGreater(world.total_cost("function"), 0.0)

    def test_missing_terminal_chunk(self):
        plan = plan_chunks(12, 5)
        world = SimWorld(seed=1)
        world.store.put_array(model_key(0), np.ones(12))
        updater = ModelUpdater(plan, step_size=0.5)
        invocation = updater.trigger(world, 0)
        world.run_until_idle()
        self.assertEqual(invocation.status, "error")
        self.assertIsInstance(invocation.error, ProtocolError)


if __name__ == "__main__":
    unittest.main()
