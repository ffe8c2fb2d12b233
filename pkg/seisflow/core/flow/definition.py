"""
Workflow definitions.

A workflow is a JSON state machine in a small subset of the Amazon States
Language: ``Task``, ``Wait``, ``Choice`` and ``Succeed`` states plus
``Retry`` policies on tasks. Tasks and Choice rules name operations and
predicates that are bound at execution time instead of embedding code or
expressions. The schema is documented in ``config/workflow.schema.json``.
"""
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple, Union

from seisflow.core.errors import ConfigError, WorkflowParseError

# Configure logging
logger = logging.getLogger(__name__)

STATE_TYPES = ("Task", "Wait", "Choice", "Succeed")

BUNDLED_DIR = Path(__file__).resolve().parents[2] / "config"


@dataclass(frozen=True)
class RetryPolicy:
    """Exponential backoff applied to a failing Task."""

    max_attempts: int = 3
    interval_seconds: float = 1.0
    backoff_rate: float = 2.0
    max_delay_seconds: Optional[float] = None


@dataclass(frozen=True)
class ChoiceRule:
    predicate: str
    next: str


@dataclass
class State:
    """One workflow state."""

    name: str
    type: str
    next: Optional[str] = None
    end: bool = False
    resource: Optional[str] = None
    seconds: float = 0.0
    choices: List[ChoiceRule] = field(default_factory=list)
    default: Optional[str] = None
    retry: Optional[RetryPolicy] = None
    comment: str = ""

    @property
    def terminal(self) -> bool:
        return self.type == "Succeed" or self.end

    def targets(self) -> List[str]:
        """States reachable in one transition."""
        if self.type == "Choice":
            out = [rule.next for rule in self.choices]
            return out + ([self.default] if self.default else [])
        return [self.next] if self.next else []


@dataclass
class WorkflowDefinition:
    """A validated state machine."""

    start_at: str
    states: Dict[str, State]
    comment: str = ""

    def __len__(self) -> int:
        return len(self.states)

    def state(self, name: str) -> State:
        return self.states[name]

    @property
    def resources(self) -> List[str]:
        return sorted({s.resource for s in self.states.values() if s.resource})

    @property
    def predicates(self) -> List[str]:
        return sorted({r.predicate for s in self.states.values() for r in s.choices})


def _retry(name: str, raw: Any, errors: List[str]) -> Optional[RetryPolicy]:
    if raw is None:
        return None
    if not isinstance(raw, list) or not raw or not isinstance(raw[0], Mapping):
        errors.append(f"state {name}: Retry must be a non-empty list of policies")
        return None
    policy = raw[0]
    try:
        retry = RetryPolicy(
            int(policy.get("MaxAttempts", 3)),
            float(policy.get("IntervalSeconds", 1.0)),
            float(policy.get("BackoffRate", 2.0)),
            None if policy.get("MaxDelaySeconds") is None else float(policy["MaxDelaySeconds"]),
        )
    except (TypeError, ValueError):
        errors.append(f"state {name}: Retry fields must be numbers")
        return None
    if retry.max_attempts < 0 or retry.interval_seconds < 0 or retry.backoff_rate < 1.0:
        errors.append(f"state {name}: Retry needs MaxAttempts >= 0, IntervalSeconds >= 0, BackoffRate >= 1")
    return retry


def _parse_state(name: str, raw: Mapping[str, Any], errors: List[str]) -> Optional[State]:
    kind = raw.get("Type")
    if kind not in STATE_TYPES:
        errors.append(f"state {name}: unknown type {kind!r}")
        return None
    state = State(name, kind, comment=str(raw.get("Comment", "")))

    if kind in ("Task", "Wait"):
        state.next = raw.get("Next")
        state.end = bool(raw.get("End", False))
        if state.end and state.next:
            errors.append(f"state {name}: Next and End are mutually exclusive")
        if not state.end and not state.next:
            errors.append(f"state {name}: needs Next or End")
    if kind == "Task":
        state.resource = raw.get("Resource")
        if not isinstance(state.resource, str) or not state.resource:
            errors.append(f"state {name}: Task without a Resource")
        state.retry = _retry(name, raw.get("Retry"), errors)
    elif kind == "Wait":
        seconds = raw.get("Seconds")
        if not isinstance(seconds, (int, float)) or seconds < 0:
            errors.append(f"state {name}: Wait needs non-negative Seconds")
        else:
            state.seconds = float(seconds)
    elif kind == "Choice":
        rules = raw.get("Choices")
        if not isinstance(rules, list) or not rules:
            errors.append(f"state {name}: Choice needs a non-empty Choices list")
            rules = []
        for i, rule in enumerate(rules):
            if not isinstance(rule, Mapping) or "Predicate" not in rule or "Next" not in rule:
                errors.append(f"state {name}: choice {i} needs Predicate and Next")
                continue
            state.choices.append(ChoiceRule(str(rule["Predicate"]), str(rule["Next"])))
        state.default = raw.get("Default")
        if not state.default:
            errors.append(f"state {name}: Choice without a Default")
    return state


def parse_workflow(text: Union[str, Mapping[str, Any]]) -> WorkflowDefinition:
    """
    Parse and validate a workflow.

    Args:
        text: JSON text or an already parsed document

    Returns:
        WorkflowDefinition

    Raises:
        WorkflowParseError: Listing every structural violation found
    """
    if isinstance(text, Mapping):
        doc: Any = text
    else:
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as e:
            raise WorkflowParseError([f"invalid JSON: {e}"]) from e
    if not isinstance(doc, Mapping):
        raise WorkflowParseError(["workflow must be a JSON object"])

    errors: List[str] = []
    raw_states = doc.get("States")
    if not isinstance(raw_states, Mapping) or not raw_states:
        raise WorkflowParseError(["workflow needs a non-empty States object"])

    states: Dict[str, State] = {}
    for name, raw in raw_states.items():
        if not isinstance(raw, Mapping):
            errors.append(f"state {name}: must be an object")
            continue
        state = _parse_state(str(name), raw, errors)
        if state is not None:
            states[state.name] = state

    start = doc.get("StartAt")
    if not start:
        errors.append("missing StartAt")
    elif start not in raw_states:
        errors.append(f"StartAt names unknown state {start!r}")

    for state in states.values():
        for target in state.targets():
            if target not in raw_states:
                errors.append(f"state {state.name}: Next {target!r} does not exist")

    if errors:
        raise WorkflowParseError(errors)
    definition = WorkflowDefinition(str(start), states, str(doc.get("Comment", "")))
    logger.debug("Parsed workflow with %d states starting at %s", len(states), start)
    return definition


def load_workflow(path: Union[str, Path]) -> WorkflowDefinition:
    """
    Read a workflow file.

    Raises:
        ConfigError: If the file cannot be read
        WorkflowParseError: If its content is invalid
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigError(f"cannot read workflow {path}: {e}") from e
    return parse_workflow(text)


def bundled_workflow(name: str = "lsrtm.json") -> Tuple[Path, WorkflowDefinition]:
    """Path and definition of a workflow shipped with the package."""
    path = BUNDLED_DIR / name
    return path, load_workflow(path)
