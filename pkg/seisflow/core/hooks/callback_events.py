"""
Callback events for the hooks system.

This module defines the standard events that can trigger callbacks
in the inversion loop and the workflow interpreter.
"""
from enum import Enum, auto


class LifecycleEvent(Enum):
    """
    Enumeration of supported lifecycle events.

    These events represent different points of an inversion run or a
    workflow execution where callbacks can be triggered.
    """

    # Inversion run events
    BEFORE_INVERSION = auto()
    AFTER_INVERSION = auto()
    ON_ERROR = auto()

    # Per-iteration events
    BEFORE_ITERATION = auto()
    GRADIENTS_COMPUTED = auto()
    AFTER_ITERATION = auto()

    # Workflow interpreter events
    STATE_ENTERED = auto()
    STATE_EXITED = auto()
