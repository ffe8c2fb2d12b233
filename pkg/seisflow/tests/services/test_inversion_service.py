"""
Tests for the inversion and workflow validation services.
"""
import json
import os
import tempfile
from unittest.async_case import IsolatedAsyncioTestCase
from unittest.mock import patch

import pandas as pd
import plotly.graph_objects as go

from seisflow.services.inversion.service import invert_service, validate_workflow_service
from seisflow.tests.helpers import tiny_problem_dict


class TestInvertService(IsolatedAsyncioTestCase):
    """Test suite for invert_service."""

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.config = os.path.join(self.tmp.name, "problem.json")
        with open(self.config, "w") as f:
            json.dump(tiny_problem_dict(n_iterations=2), f)

    def tearDown(self):
        self.tmp.cleanup()

    def _out(self, name):
        return os.path.join(self.tmp.name, name)

    async def test_in_process_run(self):
        response = await invert_service({"config": self.config, "out": self._out("a")})

        self.assertEqual(response["status"], "success")
        self.assertIsNone(response["error_type"])
        self.assertEqual(response["data"]["iterations"], 2)
        self.assertIsNone(response["data"]["cost"])
        history = pd.read_csv(os.path.join(self._out("a"), "history.csv"))
        self.assertEqual(list(history.columns), ["iteration", "misfit", "grad_norm", "shots"])
        self.assertEqual(len(history), 2)
        self.assertTrue(os.path.exists(os.path.join(self._out("a"), "model.json")))
        self.assertTrue(os.path.exists(os.path.join(self._out("a"), "model.bin")))

    async def test_history_is_byte_identical_across_runs(self):
        for name in ("a", "b"):
            response = await invert_service({"config": self.config, "seed": 4, "out": self._out(name)})
            self.assertEqual(response["status"], "success")
        with open(os.path.join(self._out("a"), "history.csv"), "rb") as fa:
            with open(os.path.join(self._out("b"), "history.csv"), "rb") as fb:
                self.assertEqual(fa.read(), fb.read())

    async def test_simulated_run_writes_trace_and_ledger(self):
        response = await invert_service({"config": self.config, "backend": "simulated", "out": self._out("sim")})

        self.assertEqual(response["status"], "success")
        self.assertEqual(response["data"]["backend"], "simulated")
        self.assertGreater(response["data"]["cost"], 0.0)
        trace = pd.read_csv(os.path.join(self._out("sim"), "trace.csv"))
        self.assertEqual(trace["state"].iloc[0], "CreateQueues")
        self.assertEqual(trace["state"].iloc[-1], "CleanUp")
        ledger = pd.read_csv(os.path.join(self._out("sim"), "ledger.csv"))
        self.assertIn("workflow", set(ledger["category"]))

    async def test_charts(self):
        with patch.object(go.Figure, "write_image") as write_image:
            response = await invert_service({"config": self.config, "out": self._out("c"), "charts": True})
        self.assertEqual(response["status"], "success")
        write_image.assert_called_once()
        self.assertTrue(any(f.endswith("misfit.svg") for f in response["data"]["files"]))

    async def test_missing_config_parameter(self):
        response = await invert_service({})
        self.assertEqual(response["status"], "error")
        self.assertEqual(response["error_type"], "config")
        self.assertIn("config", response["message"])

    async def test_unreadable_config(self):
        response = await invert_service({"config": self._out("missing.json")})
        self.assertEqual(response["status"], "error")
        self.assertEqual(response["error_type"], "config")

    async def test_unknown_backend(self):
        response = await invert_service({"config": self.config, "backend": "gpu"})
        self.assertEqual(response["status"], "error")
        self.assertEqual(response["error_type"], "config")
        self.assertIn("gpu", response["message"])

    async def test_runtime_failure(self):
        with patch("seisflow.services.inversion.service.run_inversion", side_effect=RuntimeError("boom")):
            response = await invert_service({"config": self.config, "out": self._out("x")})
        self.assertEqual(response["status"], "error")
        self.assertEqual(response["error_type"], "runtime")
        self.assertIn("boom", response["message"])


class TestValidateWorkflowService(IsolatedAsyncioTestCase):
    """Test suite for validate_workflow_service."""

    async def test_bundled_workflow(self):
        response = await validate_workflow_service({})
        self.assertEqual(response["status"], "success")
        self.assertEqual(response["message"], "6 states, OK")
        self.assertEqual(response["data"]["start_at"], "CreateQueues")

    async def test_bare_bundled_name(self):
        response = await validate_workflow_service({"path": "lsrtm.json"})
        self.assertEqual(response["message"], "6 states, OK")

    async def test_broken_workflow(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "broken.json")
            with open(path, "w") as f:
                json.dump({"StartAt": "Nowhere", "States": {"Done": {"Type": "Succeed"}}}, f)
            response = await validate_workflow_service({"path": path})
        self.assertEqual(response["status"], "error")
        self.assertEqual(response["error_type"], "config")
        self.assertIn("Nowhere", response["message"])
