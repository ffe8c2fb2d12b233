"""
Tests for the retry and async bridge utilities.
"""
import asyncio
import unittest
from unittest.mock import Mock

import numpy as np

from seisflow.core.utils.async_bridge import AsyncBridge, map_in_executor
from seisflow.core.utils.retry import backoff_delay, retry_with_backoff, with_retry


class TestRetry(unittest.TestCase):
    """Test suite for retry_with_backoff."""

    def test_backoff_delays(self):
        """Delays grow geometrically and respect the cap."""
        self.assertEqual(backoff_delay(1, 2.0), 2.0)
        self.assertEqual(backoff_delay(3, 2.0), 8.0)
        self.assertEqual(backoff_delay(10, 2.0, max_delay=30.0), 30.0)

    def test_jitter_is_bounded(self):
        """Jitter adds at most a quarter of the delay."""
        rng = np.random.default_rng(0)
        for attempt in range(1, 6):
            delay = backoff_delay(attempt, 1.0, jitter_rng=rng)
            base = 2.0 ** (attempt - 1)
            self.assertGreaterEqual(delay, base)
            self.assertLessEqual(delay, 1.25 * base)

    def test_succeeds_after_failures(self):
        """Transient errors are retried with the injected sleep."""
        operation = Mock(side_effect=[RuntimeError("a"), RuntimeError("b"), "done"])
        waits = []

        result = retry_with_backoff(operation, base_delay=1.0, sleep=waits.append)

        self.assertEqual(result, "done")
        self.assertEqual(waits, [1.0, 2.0])
        self.assertEqual(operation.call_count, 3)

    def test_gives_up(self):
        """The last error propagates once retries are exhausted."""
        operation = Mock(side_effect=RuntimeError("down"))
        with self.assertRaises(RuntimeError):
            retry_with_backoff(operation, max_retries=2, sleep=lambda _: None)
        self.assertEqual(operation.call_count, 3)

    def test_non_retryable_error(self):
        """Errors outside retry_exceptions are raised immediately."""
        operation = Mock(side_effect=KeyError("x"))
        with self.assertRaises(KeyError):
            retry_with_backoff(
                operation, retry_exceptions=RuntimeError, sleep=lambda _: None
            )
        self.assertEqual(operation.call_count, 1)

    def test_on_retry_hook(self):
        """on_retry sees each attempt number."""
        seen = []
        operation = Mock(side_effect=[ValueError("a"), 7])
        retry_with_backoff(
            operation, sleep=lambda _: None, on_retry=lambda n, e, d: seen.append((n, d))
        )
        self.assertEqual(seen, [(1, 1.0)])

    def test_decorator(self):
        """with_retry wraps a function."""
        calls = {"n": 0}

        @with_retry(max_retries=1, base_delay=0.0)
        def flaky():
            calls["n"] += 1
            if calls["n"] == 1:
                raise RuntimeError("first")
            return calls["n"]

        self.assertEqual(flaky(), 2)


class TestAsyncBridge(unittest.TestCase):
    """Test suite for AsyncBridge."""

    def test_run_async(self):
        """Coroutines run to completion from synchronous code."""

        async def add(a, b):
            await asyncio.sleep(0)
            return a + b

        self.assertEqual(AsyncBridge.run_async(add, 2, b=3), 5)

    def test_map_keeps_order(self):
        """Results come back in input order."""
        result = AsyncBridge.run_async(map_in_executor, lambda x: x * x, range(10), 4)
        self.assertEqual(result, [x * x for x in range(10)])


if __name__ == "__main__":
    unittest.main()
