"""
Callback hooks module.

This module provides a flexible callback mechanism that allows for custom
behaviors such as progress logging or instrumentation without changing the
inversion loop or the workflow interpreter.
"""
from seisflow.core.hooks.callback_events import LifecycleEvent
from seisflow.core.hooks.callback_registry import CallbackRegistry

__all__ = ["LifecycleEvent", "CallbackRegistry"]
