"""
Configuration file for pytest.

Auto-marks coroutine tests for pytest-asyncio and registers the ``slow``
marker used by the desk-scale acceptance runs.
"""
import asyncio

import pytest

pytest_plugins = ["pytest_asyncio"]


def pytest_configure(config):
    """Register custom markers."""
    config.addinivalue_line("markers", "slow: desk-scale runs taking tens of seconds or more")


def pytest_collection_modifyitems(config, items):
    """Automatically mark async tests with pytest.mark.asyncio"""
    for item in items:
        if asyncio.iscoroutinefunction(item.function):
            item.add_marker(pytest.mark.asyncio)
