"""
Exception hierarchy for seisflow.

Every error raised by the package derives from SeisflowError so callers
(services, the CLI) can separate expected failures from programming errors.
"""
from typing import Any, List, Optional


class SeisflowError(Exception):
    """Base class for all seisflow errors."""


class ArgumentError(SeisflowError, ValueError):
    """Invalid argument passed to an operation."""


class ConfigError(SeisflowError):
    """Invalid or incomplete configuration."""


class DataError(SeisflowError):
    """Input data does not satisfy an operation's coverage requirements."""


class NumericalInstabilityError(SeisflowError, ArithmeticError):
    """Wavefield became non-finite during time stepping."""

    def __init__(self, step: int, message: Optional[str] = None):
        self.step = step
        super().__init__(message or f"Non-finite wavefield detected at time step {step}")


class SimulationError(SeisflowError, RuntimeError):
    """The discrete-event simulator reached an invalid state."""


class ObjectNotFoundError(SeisflowError, KeyError):
    """Object store lookup for an absent key."""

    def __init__(self, key: str):
        self.key = key
        super().__init__(key)

    def __str__(self) -> str:
        return f"Object not found: {self.key}"


class FunctionTimeoutError(SeisflowError, RuntimeError):
    """A function invocation exceeded the runtime's duration cap."""

    def __init__(self, duration_s: float, cap_s: float):
        self.duration_s = duration_s
        self.cap_s = cap_s
        super().__init__(
            f"Function modeled duration {duration_s:.1f} s exceeds cap {cap_s:.1f} s"
        )


class ProtocolError(SeisflowError, RuntimeError):
    """Reduction protocol violated (poisoned reduction)."""


class ReductionError(SeisflowError, RuntimeError):
    """The event-driven reduction stalled or could not complete."""


class WorkflowParseError(SeisflowError):
    """Structural errors found while parsing a workflow definition."""

    def __init__(self, errors: List[str]):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


class WorkflowExecutionError(SeisflowError, RuntimeError):
    """A workflow execution failed; carries the partial trace."""

    def __init__(self, message: str, trace: Any = None):
        self.trace = trace
        super().__init__(message)


class BackendError(SeisflowError, RuntimeError):
    """An inversion backend failed during a specific iteration."""

    def __init__(self, iteration: int, cause: BaseException):
        self.iteration = iteration
        self.cause = cause
        super().__init__(f"Backend failed at iteration {iteration}: {cause}")
