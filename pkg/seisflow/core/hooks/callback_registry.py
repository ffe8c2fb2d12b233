"""
Lifecycle callbacks for inversion backends and the workflow interpreter.

Progress reporting, tests and instrumentation subscribe here instead of
being wired into the numerical code.
"""
import logging
from typing import Any, Callable, Dict, List

from seisflow.core.hooks.callback_events import LifecycleEvent

# Configure logging
logger = logging.getLogger(__name__)

Callback = Callable[[Dict[str, Any]], None]


class CallbackRegistry:
    """Callbacks keyed by lifecycle event.

    Example:
        ```python
        registry = CallbackRegistry()
        registry.register(
            LifecycleEvent.AFTER_ITERATION,
            lambda ctx: print(ctx["iteration"], ctx["misfit"]),
        )
        backend = InProcessBackend(callback_registry=registry)
        ```
    """

    def __init__(self):
        self._callbacks: Dict[LifecycleEvent, List[Callback]] = {}

    def register(self, event: LifecycleEvent, callback: Callback) -> None:
        """
        Subscribe a callback to an event.

        Args:
            event: Lifecycle event
            callback: Called with the event's context dict
        """
        self._callbacks.setdefault(event, []).append(callback)
        logger.debug("Registered callback for %s", event.name)

    def unregister(self, event: LifecycleEvent, callback: Callback) -> None:
        """Remove a callback; unknown callbacks are ignored."""
        callbacks = self._callbacks.get(event, [])
        if callback in callbacks:
            callbacks.remove(callback)
            logger.debug("Unregistered callback for %s", event.name)

    def get_callbacks(self, event: LifecycleEvent) -> List[Callback]:
        return list(self._callbacks.get(event, []))

    def trigger(self, event: LifecycleEvent, context: Dict[str, Any]) -> None:
        """
        Call every callback of an event in registration order.

        A failing callback is logged and the remaining ones still run; the
        caller never sees the exception.

        Args:
            event: Lifecycle event
            context: Iteration, state or error details passed to each callback
        """
        for callback in self.get_callbacks(event):
            try:
                callback(context)
            except Exception as e:  # pylint: disable=broad-except
                logger.error("Callback for %s failed: %s", event.name, e, exc_info=True)
