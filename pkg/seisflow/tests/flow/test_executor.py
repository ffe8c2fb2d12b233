"""
Tests for the workflow interpreter, including the bundled LS-RTM workflow.
"""
import re
import unittest

import pandas as pd

from seisflow.core.cloudsim.scenario import Scenario
from seisflow.core.cloudsim.world import SimWorld
from seisflow.core.errors import ConfigError, DataError, WorkflowExecutionError
from seisflow.core.flow.definition import parse_workflow
from seisflow.core.flow.executor import Bindings, execute, transition_cost
from seisflow.core.hooks import CallbackRegistry, LifecycleEvent
from seisflow.core.imaging.backends import SimulatedBackend
from seisflow.core.imaging.inversion import run_inversion
from seisflow.core.imaging.survey import problem_from_dict
from seisflow.core.reducer.chunking import model_key
from seisflow.tests.helpers import tiny_problem_dict


def _flow(states, start="Start"):
    return parse_workflow({"StartAt": start, "States": states})


MINIMAL = _flow(
    {
        "Start": {"Type": "Task", "Resource": "noop", "Next": "Done"},
        "Done": {"Type": "Succeed"},
    }
)

COUNTER = _flow(
    {
        "Start": {"Type": "Task", "Resource": "increment", "Next": "IsCountReached"},
        "IsCountReached": {
            "Type": "Choice",
            "Choices": [{"Predicate": "limit", "Next": "Done"}],
            "Default": "Start",
        },
        "Done": {"Type": "Succeed"},
    }
)


class TestExecute(unittest.TestCase):
    """Test suite for execute on small workflows."""

    def test_minimal(self):
        world = SimWorld(seed=0)
        calls = []
        terminal, trace = execute(MINIMAL, Bindings({"noop": calls.append}), world)
        self.assertEqual(terminal, "Done")
        self.assertEqual(trace.states, ["Start", "Done"])
        self.assertEqual(trace.transitions, 1)
        self.assertEqual(calls, [world])
        self.assertEqual(world.total_cost("workflow"), transition_cost(1))

    def test_wait_advances_clock(self):
        flow = _flow(
            {
                "Start": {"Type": "Wait", "Seconds": 30, "Next": "Done"},
                "Done": {"Type": "Succeed"},
            }
        )
        world = SimWorld(seed=0)
        world.run_until(5.0)
        _, trace = execute(flow, Bindings(), world)
        self.assertEqual(world.clock, 35.0)
        self.assertEqual(trace.steps[0].enter_t, 5.0)
        self.assertEqual(trace.steps[0].exit_t, 35.0)
        self.assertEqual(trace.duration, 30.0)

    def test_counter_loop(self):
        count = {"n": 0}

        def increment(world):
            count["n"] += 1

        bindings = Bindings({"increment": increment}, {"limit": lambda w: count["n"] >= 3})
        _, trace = execute(COUNTER, bindings, SimWorld(seed=0))
        self.assertEqual(trace.states.count("IsCountReached"), 3)
        self.assertEqual(trace.states[-1], "Done")
        self.assertEqual(trace.transitions, 6)

    def test_task_retried_once(self):
        flow = _flow(
            {
                "Start": {
                    "Type": "Task",
                    "Resource": "flaky",
                    "Retry": [{"MaxAttempts": 2, "IntervalSeconds": 10, "BackoffRate": 2}],
                    "Next": "Done",
                },
                "Done": {"Type": "Succeed"},
            }
        )
        attempts = []

        def flaky(world):
            attempts.append(world.clock)
            if len(attempts) == 1:
                raise DataError("transient")

        world = SimWorld(seed=0)
        terminal, trace = execute(flow, Bindings({"flaky": flaky}), world)
        self.assertEqual(terminal, "Done")
        self.assertEqual(trace.steps[0].outcome, "retried")
        # the retry waits on the simulated clock
        self.assertEqual(attempts, [0.0, 10.0])

    def test_exhausted_retries_fail_with_trace(self):
        flow = _flow(
            {
                "Start": {"Type": "Task", "Resource": "noop", "Next": "Broken"},
                "Broken": {
                    "Type": "Task",
                    "Resource": "broken",
                    "Retry": [{"MaxAttempts": 1, "IntervalSeconds": 1}],
                    "End": True,
                },
            }
        )

        def broken(world):
            raise DataError("always")

        with self.assertRaises(WorkflowExecutionError) as ctx:
            execute(flow, Bindings({"noop": lambda w: None, "broken": broken}), SimWorld(seed=0))
        trace = ctx.exception.trace
        self.assertEqual(trace.states, ["Start", "Broken"])
        self.assertEqual(trace.steps[-1].outcome, "failed")
        self.assertIsInstance(ctx.exception.__cause__, DataError)

    def test_predicate_failure(self):
        def limit(world):
            raise DataError("cannot tell")

        with self.assertRaises(WorkflowExecutionError) as ctx:
            execute(COUNTER, Bindings({"increment": lambda w: None}, {"limit": limit}), SimWorld(seed=0))
        self.assertEqual(ctx.exception.trace.states, ["Start", "IsCountReached"])

    def test_unbound_names(self):
        with self.assertRaises(ConfigError) as ctx:
            execute(COUNTER, Bindings(), SimWorld(seed=0))
        self.assertIn("increment", str(ctx.exception))
        self.assertIn("limit", str(ctx.exception))

    def test_transition_guard(self):
        bindings = Bindings({"increment": lambda w: None}, {"limit": lambda w: False})
        with self.assertRaises(WorkflowExecutionError) as ctx:
            execute(COUNTER, bindings, SimWorld(seed=0), max_transitions=10)
        self.assertEqual(ctx.exception.trace.transitions, 10)

    def test_state_callbacks(self):
        registry = CallbackRegistry()
        entered, exited = [], []
        registry.register(LifecycleEvent.STATE_ENTERED, lambda ctx: entered.append(ctx["state"]))
        registry.register(LifecycleEvent.STATE_EXITED, lambda ctx: exited.append(ctx["outcome"]))
        execute(MINIMAL, Bindings({"noop": lambda w: None}), SimWorld(seed=0), registry)
        self.assertEqual(entered, ["Start", "Done"])
        self.assertEqual(exited, ["ok", "ok"])

    def test_trace_frame(self):
        _, trace = execute(MINIMAL, Bindings({"noop": lambda w: None}), SimWorld(seed=0))
        frame = trace.to_frame()
        self.assertIsInstance(frame, pd.DataFrame)
        self.assertEqual(list(frame.columns), ["state", "enter_t", "exit_t", "outcome"])
        self.assertEqual(len(frame), 2)


class TestTransitionCost(unittest.TestCase):
    """Test suite for transition_cost."""

    def test_rates(self):
        self.assertAlmostEqual(transition_cost(1000), 0.025)
        self.assertEqual(transition_cost(0), 0.0)
        self.assertAlmostEqual(transition_cost(2500), 0.0625)
        self.assertAlmostEqual(transition_cost(1000, rate=0.05), 0.05)


class TestLsrtmWorkflow(unittest.TestCase):
    """Test suite for the bundled workflow on the simulated cloud."""

    PATTERN = re.compile(
        r"CreateQueues"
        r"( ComputeGradient( WaitForGradient CheckGradientStatus)+ IsCountReached){3}"
        r" CleanUp"
    )

    @classmethod
    def setUpClass(cls):
        cls.problem = problem_from_dict(tiny_problem_dict(n_iterations=3))

    def _run(self, seed=5):
        backend = SimulatedBackend(scenario=Scenario(seed=seed))
        run_inversion(self.problem.survey, self.problem.config, backend)
        return backend

    def test_state_sequence_and_billing(self):
        backend = self._run()
        trace, world = backend.last_trace, backend.last_world

        self.assertRegex(" ".join(trace.states), "^" + self.PATTERN.pattern + "$")
        self.assertEqual(trace.states.count("ComputeGradient"), 3)
        self.assertTrue(all(step.outcome == "ok" for step in trace))
        self.assertAlmostEqual(transition_cost(trace), trace.transitions * 0.025 / 1000.0)
        self.assertAlmostEqual(world.total_cost("workflow"), transition_cost(trace), places=12)

    def test_iteration_passes_only_after_update(self):
        backend = self._run()
        trace, world = backend.last_trace, backend.last_world
        passed = [
            step.enter_t for step in trace if step.state == "IsCountReached"
        ]
        for it, t in enumerate(passed):
            self.assertLessEqual(world.store.written_at(model_key(it + 1)), t)

    def test_same_seed_same_trace(self):
        a = self._run(seed=9).last_trace.to_frame()
        b = self._run(seed=9).last_trace.to_frame()
        pd.testing.assert_frame_equal(a, b)


if __name__ == "__main__":
    unittest.main()
