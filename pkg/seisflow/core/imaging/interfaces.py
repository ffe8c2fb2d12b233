"""
Base interface for inversion backends.

A backend runs the fixed-step SGD loop of an LS-RTM problem somewhere: in
this process, or as a serverless workflow on the simulated cloud. Backends
share the batch sampler and the summation order, so for the same seed they
produce the same iterates.
"""
from abc import ABC, abstractmethod
from typing import Any, Callable, Dict, Optional, Tuple

from seisflow.core.hooks import CallbackRegistry, LifecycleEvent
from seisflow.core.imaging.survey import InversionConfig, InversionHistory, Survey
from seisflow.core.wavekit.grid import VelocityModel


class InversionBackend(ABC):
    """
    Base interface for all inversion backends.

    Concrete backends implement ``run``. Progress is reported through the
    callback registry (BEFORE_ITERATION, GRADIENTS_COMPUTED,
    AFTER_ITERATION, and STATE_ENTERED/STATE_EXITED for workflow backends).
    """

    name: str = "backend"

    def __init__(self, callback_registry: Optional[CallbackRegistry] = None):
        """
        Initialize the backend with an optional callback registry.

        Args:
            callback_registry: Registry for callback hooks, a new one is created if None
        """
        self._callback_registry = callback_registry or CallbackRegistry()

    @property
    def callback_registry(self) -> CallbackRegistry:
        return self._callback_registry

    def register_callback(self, event: LifecycleEvent, callback: Callable[[Dict[str, Any]], None]) -> None:
        """
        Register a callback for a specific event.

        Args:
            event: The event that will trigger this callback
            callback: The function to call when the event occurs
        """
        self._callback_registry.register(event, callback)

    def unregister_callback(
        self, event: LifecycleEvent, callback: Callable[[Dict[str, Any]], None]
    ) -> None:
        """
        Remove a previously registered callback.

        Args:
            event: The event the callback was registered for
            callback: The callback function to remove
        """
        self._callback_registry.unregister(event, callback)

    def trigger_callback(self, event: LifecycleEvent, context: Dict[str, Any]) -> None:
        """
        Trigger all callbacks registered for an event.

        Args:
            event: The event that occurred
            context: Data to pass to the callbacks
        """
        self._callback_registry.trigger(event, context)

    @abstractmethod
    def run(
        self, survey: Survey, config: InversionConfig, step_size: float
    ) -> Tuple[VelocityModel, InversionHistory]:
        """
        Run the SGD loop with a fixed step.

        Args:
            survey: Observed shots
            config: Loop settings
            step_size: Resolved fixed step

        Returns:
            (final model, per-iteration history)

        Raises:
            BackendError: Carrying the iteration that failed
        """
