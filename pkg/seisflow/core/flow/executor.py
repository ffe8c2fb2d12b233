"""
Workflow interpreter running on the simulated clock.

States run strictly one after another. Tasks call bound operations and
return at once (the work they start is scheduled on the world), Wait
states advance the world's clock, and Choice states evaluate registered
predicates. Every transition is billed to the world's ledger.
"""
import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Tuple, Type, Union

import pandas as pd

from seisflow.core.cloudsim.world import SimWorld
from seisflow.core.constants import STATE_TRANSITION_RATE
from seisflow.core.errors import ConfigError, SeisflowError, WorkflowExecutionError
from seisflow.core.flow.definition import State, WorkflowDefinition
from seisflow.core.hooks import CallbackRegistry, LifecycleEvent
from seisflow.core.utils.retry import retry_with_backoff

# Configure logging
logger = logging.getLogger(__name__)

Operation = Callable[[SimWorld], Any]
Predicate = Callable[[SimWorld], bool]

DEFAULT_MAX_TRANSITIONS = 100_000


@dataclass
class Bindings:
    """Operations and predicates the workflow refers to by name."""

    resources: Dict[str, Operation] = field(default_factory=dict)
    predicates: Dict[str, Predicate] = field(default_factory=dict)

    def check(self, definition: WorkflowDefinition) -> None:
        """
        Raises:
            ConfigError: Naming every unbound resource and predicate
        """
        missing = [f"resource {r!r}" for r in definition.resources if r not in self.resources]
        missing += [f"predicate {p!r}" for p in definition.predicates if p not in self.predicates]
        if missing:
            raise ConfigError("unbound " + ", ".join(missing))


@dataclass(frozen=True)
class TraceStep:
    state: str
    enter_t: float
    exit_t: float
    outcome: str


class ExecutionTrace:
    """Ordered record of the states an execution passed through."""

    def __init__(self):
        self.steps: List[TraceStep] = []

    def __len__(self) -> int:
        return len(self.steps)

    def __iter__(self):
        return iter(self.steps)

    def append(self, step: TraceStep) -> None:
        self.steps.append(step)

    @property
    def states(self) -> List[str]:
        return [s.state for s in self.steps]

    @property
    def transitions(self) -> int:
        """Edges taken between consecutive states."""
        return max(len(self.steps) - 1, 0)

    @property
    def duration(self) -> float:
        if not self.steps:
            return 0.0
        return self.steps[-1].exit_t - self.steps[0].enter_t

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [(s.state, s.enter_t, s.exit_t, s.outcome) for s in self.steps],
            columns=["state", "enter_t", "exit_t", "outcome"],
        )


def transition_cost(trace: Union[ExecutionTrace, int], rate: float = STATE_TRANSITION_RATE) -> float:
    """
    Billing of a workflow execution.

    Args:
        trace: Execution trace or a number of transitions
        rate: $ per 1000 state transitions

    Returns:
        Cost in $
    """
    n = trace if isinstance(trace, int) else trace.transitions
    return n * rate / 1000.0


def _run_task(
    world: SimWorld,
    state: State,
    operation: Operation,
    retry_exceptions: Union[Type[Exception], Tuple[Type[Exception], ...]],
) -> str:
    attempts = []

    def note(attempt: int, error: Exception, delay: float) -> None:
        attempts.append(attempt)
        logger.warning("Task %s failed (%s); retry %d in %.1f s", state.name, error, attempt, delay)

    if state.retry is None:
        operation(world)
        return "ok"
    policy = state.retry
    retry_with_backoff(
        operation,
        world,
        max_retries=policy.max_attempts,
        base_delay=policy.interval_seconds,
        backoff_rate=policy.backoff_rate,
        max_delay=policy.max_delay_seconds,
        retry_exceptions=retry_exceptions,
        sleep=lambda delay: world.run_until(world.clock + delay),
        on_retry=note,
    )
    return "retried" if attempts else "ok"


def execute(
    definition: WorkflowDefinition,
    bindings: Bindings,
    world: SimWorld,
    callback_registry: Optional[CallbackRegistry] = None,
    max_transitions: int = DEFAULT_MAX_TRANSITIONS,
    rate: float = STATE_TRANSITION_RATE,
    retry_exceptions: Union[Type[Exception], Tuple[Type[Exception], ...]] = SeisflowError,
) -> Tuple[str, ExecutionTrace]:
    """
    Run a workflow to completion on a simulated world.

    Args:
        definition: Parsed workflow
        bindings: Operations and predicates named by the workflow
        world: Simulated cloud the operations act on
        callback_registry: Receives STATE_ENTERED and STATE_EXITED events
        max_transitions: Livelock guard
        rate: $ per 1000 transitions charged to the world's ledger
        retry_exceptions: Task errors that a Retry policy applies to

    Returns:
        (terminal state name, execution trace)

    Raises:
        ConfigError: If a resource or predicate is unbound
        WorkflowExecutionError: If a state fails or the guard trips; the
            partial trace is attached
    """
    bindings.check(definition)
    trace = ExecutionTrace()
    name = definition.start_at
    logger.info("Starting workflow at %s (t=%.1f)", name, world.clock)

    while True:
        state = definition.state(name)
        enter_t = world.clock
        if callback_registry:
            callback_registry.trigger(
                LifecycleEvent.STATE_ENTERED, {"state": name, "time": enter_t, "world": world}
            )
        logger.debug("Entering %s at t=%.1f", name, enter_t)

        outcome = "ok"
        nxt: Optional[str] = state.next
        try:
            if state.type == "Task":
                outcome = _run_task(world, state, bindings.resources[state.resource], retry_exceptions)
            elif state.type == "Wait":
                world.run_until(world.clock + state.seconds)
            elif state.type == "Choice":
                nxt = state.default
                for rule in state.choices:
                    if bindings.predicates[rule.predicate](world):
                        nxt = rule.next
                        break
        except Exception as e:
            trace.append(TraceStep(name, enter_t, world.clock, "failed"))
            logger.error("Workflow failed in state %s at t=%.1f: %s", name, world.clock, e)
            raise WorkflowExecutionError(f"state {name} failed: {e}", trace) from e

        trace.append(TraceStep(name, enter_t, world.clock, outcome))
        if callback_registry:
            callback_registry.trigger(
                LifecycleEvent.STATE_EXITED,
                {"state": name, "time": world.clock, "outcome": outcome, "world": world},
            )
        if state.terminal:
            logger.info(
                "Workflow finished in %s after %d transitions (t=%.1f)", name, trace.transitions, world.clock
            )
            return name, trace

        if trace.transitions + 1 > max_transitions:
            raise WorkflowExecutionError(f"exceeded {max_transitions} transitions", trace)
        world.charge("workflow", "transitions", rate / 1000.0, 1.0)
        name = nxt  # type: ignore[assignment]
