"""
Tests for the batch service.
"""
import unittest

from seisflow.core.cloudsim.batch import (
    ArrayJob,
    BatchJob,
    MultiNode,
    OnDemand,
    Spot,
    inject_interruption,
    submit_array_job,
)
from seisflow.core.cloudsim.catalog import SpotMarket, SpotPriceSeries
from seisflow.core.cloudsim.world import FailurePlan, SimConfig, SimWorld
from seisflow.core.errors import ArgumentError, ConfigError

M4_ON_DEMAND = 0.800


def fixed_world(startup=60.0, **kwargs):
    """World with a deterministic startup and no runtime jitter."""
    config = SimConfig(startup_window=(startup, startup), runtime_jitter=0.0)
    return SimWorld(seed=0, config=config, **kwargs)


class TestArrayJobs(unittest.TestCase):
    """Test suite for array jobs."""

    def test_single_task_timeline(self):
        """Startup 60 s plus runtime 100 s completes at 160 s."""
        world = fixed_world()
        done = []
        job = BatchJob("one", ArrayJob(1), runtime=100.0, action=lambda w, i: done.append(w.clock))

        job_id = submit_array_job(world, job)
        world.run_until_idle()

        self.assertEqual(done, [160.0])
        record = world.jobs[job_id]
        self.assertEqual(record.tasks[0].start, 60.0)
        self.assertEqual(record.completed_at, 160.0)
        self.assertEqual(record.succeeded, 1)

    def test_billing_excludes_queue_wait(self):
        """Instances are billed for their runtime only."""
        world = fixed_world(startup=120.0)
        runtimes = [100.0, 250.0, 387.0]
        submit_array_job(world, BatchJob("bill", ArrayJob(3), runtime=runtimes))
        world.run_until_idle()

        expected = sum(runtimes) * M4_ON_DEMAND / 3600.0
        self.assertAlmostEqual(world.total_cost("instance"), expected, places=12)
        seconds = sum(e.quantity for e in world.ledger if e.category == "instance")
        self.assertAlmostEqual(seconds, sum(runtimes))

    def test_starts_inside_window(self):
        """Every start of a 128-task job falls in the staged startup window."""
        world = SimWorld(seed=3)
        job_id = submit_array_job(world, BatchJob("big", ArrayJob(128), runtime=50.0))
        world.run_until_idle()

        starts = [t.start for t in world.jobs[job_id].tasks]
        self.assertEqual(len(starts), 128)
        self.assertTrue(all(60.0 <= s <= 180.0 for s in starts))

    def test_runtime_jitter_bounds(self):
        """Container runtimes stretch by at most ten percent."""
        world = SimWorld(seed=5)
        job_id = submit_array_job(world, BatchJob("jit", ArrayJob(50), runtime=200.0))
        world.run_until_idle()
        for task in world.jobs[job_id].tasks:
            self.assertGreaterEqual(task.end - task.start, 200.0)
            self.assertLessEqual(task.end - task.start, 220.0 + 1e-9)

    def test_on_complete_callback(self):
        """on_complete fires once when the last task finishes."""
        world = fixed_world()
        calls = []
        submit_array_job(
            world, BatchJob("cb", ArrayJob(4), runtime=[10.0, 20.0, 30.0, 40.0]), calls.append
        )
        world.run_until_idle()
        self.assertEqual(len(calls), 1)
        self.assertEqual(calls[0].completed_at, 100.0)

    def test_validation(self):
        """Bad jobs are rejected at submission."""
        world = fixed_world()
        with self.assertRaises(ConfigError):
            submit_array_job(world, BatchJob("x", ArrayJob(1), 10.0, instance_type="z9.huge"))
        with self.assertRaises(ConfigError):
            submit_array_job(world, BatchJob("x", MultiNode(4), 10.0, pricing=Spot("us-east-1a")))
        with self.assertRaises(ArgumentError):
            submit_array_job(world, BatchJob("x", ArrayJob(0), 10.0))


class TestSpotAndFailures(unittest.TestCase):
    """Test suite for spot billing and interruptions."""

    def test_spot_billing_follows_series(self):
        """Spot instances integrate the zone's price series."""
        market = SpotMarket([SpotPriceSeries("zone-a", "m4.4xlarge", [0.0, 100.0], [0.36, 0.72])])
        world = fixed_world(startup=60.0, market=market)
        submit_array_job(world, BatchJob("s", ArrayJob(1), 80.0, pricing=Spot("zone-a")))
        world.run_until_idle()
        # 40 s at 0.36 $/h then 40 s at 0.72 $/h
        self.assertAlmostEqual(world.total_cost("instance"), (40 * 0.36 + 40 * 0.72) / 3600.0)

    def test_interruption_with_restart(self):
        """An interrupted task restarts after the penalty and runs in full."""
        world = fixed_world()
        done = []
        job = BatchJob("r", ArrayJob(1), 100.0, action=lambda w, i: done.append(w.clock))
        job_id = submit_array_job(world, job)
        world.run_until(110.0)
        instance_id = world.jobs[job_id].tasks[0].instance_ids[0]

        inject_interruption(world, instance_id, 110.0)
        world.run_until_idle()

        task = world.jobs[job_id].tasks[0]
        self.assertEqual(task.attempts, 2)
        self.assertEqual(done, [110.0 + 120.0 + 100.0])
        self.assertEqual(world.instances[instance_id].state, "interrupted")
        seconds = sorted(e.quantity for e in world.ledger if e.category == "instance")
        self.assertEqual(seconds, [50.0, 100.0])
        self.assertTrue(any(e.label.startswith("warning:") for e in world.trace))

    def test_interruption_without_restart(self):
        """Without restarts the task fails and its action never runs."""
        world = fixed_world(failure_plan=FailurePlan({("nr", 0): 0.5}, restart=False))
        done = []
        job_id = submit_array_job(
            world, BatchJob("nr", ArrayJob(2), 100.0, action=lambda w, i: done.append(i))
        )
        world.run_until_idle()
        self.assertEqual(done, [1])
        self.assertEqual(world.jobs[job_id].failed, 1)
        self.assertTrue(world.jobs[job_id].done)

    def test_failure_plan_restarts(self):
        """A planned interruption halfway costs half a runtime plus the penalty."""
        world = fixed_world(failure_plan=FailurePlan({("fp", 0): 0.5}))
        job_id = submit_array_job(world, BatchJob("fp", ArrayJob(1), 100.0))
        world.run_until_idle()
        self.assertEqual(world.jobs[job_id].completed_at, 60.0 + 50.0 + 120.0 + 100.0)

    def test_unknown_instance(self):
        """Interrupting an unknown instance is an argument error."""
        with self.assertRaises(ArgumentError):
            inject_interruption(fixed_world(), "i-999999")


class TestMultiNode(unittest.TestCase):
    """Test suite for multi-node jobs."""

    def test_waits_for_all_nodes(self):
        """The job runs once every node is up; each node is billed from its own start."""
        world = SimWorld(seed=11, config=SimConfig(runtime_jitter=0.0))
        job_id = submit_array_job(world, BatchJob("mn", MultiNode(3), 100.0, pricing=OnDemand()))
        world.run_until_idle()

        record = world.jobs[job_id]
        nodes = [world.instances[i] for i in record.tasks[0].instance_ids]
        last_up = max(n.start for n in nodes)
        self.assertEqual(record.tasks[0].start, last_up)
        self.assertAlmostEqual(record.completed_at, last_up + 100.0)
        billed = sum(e.quantity for e in world.ledger if e.category == "instance")
        self.assertAlmostEqual(billed, sum(record.completed_at - n.start for n in nodes))


if __name__ == "__main__":
    unittest.main()
