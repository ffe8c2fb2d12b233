"""
Factory for creating inversion backends.

This module provides factory functions for creating properly configured
backends with their dependencies injected.
"""
from typing import Any, Optional

from seisflow.core.cloudsim.scenario import Scenario
from seisflow.core.errors import ConfigError
from seisflow.core.hooks import CallbackRegistry
from seisflow.core.imaging.backends import InProcessBackend, SimulatedBackend
from seisflow.core.imaging.interfaces import InversionBackend
from seisflow.core.imaging.survey import Problem

BACKENDS = ("in-process", "simulated")


def create_in_process_backend(
    max_workers: int = 1, callback_registry: Optional[CallbackRegistry] = None
) -> InProcessBackend:
    """
    Create a backend evaluating shots in this process.

    Returns:
        Configured InProcessBackend instance
    """
    return InProcessBackend(max_workers=max_workers, callback_registry=callback_registry)


def create_simulated_backend(
    problem: Optional[Problem] = None,
    scenario: Optional[Scenario] = None,
    callback_registry: Optional[CallbackRegistry] = None,
    **kwargs: Any,
) -> SimulatedBackend:
    """
    Create a backend running the workflow on a simulated cloud.

    Args:
        problem: Supplies the reduction settings when given
        scenario: Simulated world settings
        callback_registry: Registry for callback hooks
        **kwargs: Passed on to SimulatedBackend

    Returns:
        Configured SimulatedBackend instance
    """
    if problem is not None:
        kwargs.setdefault("deterministic", problem.deterministic_reduction)
        kwargs.setdefault("max_object_elems", problem.max_object_elems)
        kwargs.setdefault("n_queues", problem.n_queues)
    return SimulatedBackend(scenario=scenario, callback_registry=callback_registry, **kwargs)


def create_backend(name: str, **kwargs: Any) -> InversionBackend:
    """
    Create a backend by name.

    Args:
        name: ``in-process`` or ``simulated``
        **kwargs: Passed to the specific factory

    Raises:
        ConfigError: For an unknown backend name
    """
    if name == "in-process":
        return create_in_process_backend(**kwargs)
    if name == "simulated":
        return create_simulated_backend(**kwargs)
    raise ConfigError(f"unknown backend {name!r}; choose one of {', '.join(BACKENDS)}")
