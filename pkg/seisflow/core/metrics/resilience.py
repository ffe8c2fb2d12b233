"""
Resilience of a batch of gradient tasks to instance failures.

The resilience factor is the failure-free time-to-solution divided by the
time-to-solution with failures. Failures are sampled per realization:
a fraction of the tasks is hit once, at a uniformly random point of its
first run. With restarts the task resumes on the same worker after a
penalty and starts over. Without restarts the worker is lost and the task,
partial work discarded, goes back to the queue for the surviving workers.
"""
import heapq
import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from seisflow.core.constants import RESTART_PENALTY_S
from seisflow.core.errors import ArgumentError
from seisflow.core.metrics.idle import RuntimeSample, list_schedule

# Configure logging
logger = logging.getLogger(__name__)

DEFAULT_REALIZATIONS = 10


@dataclass(frozen=True)
class FailureScenario:
    """
    Failure model of a Monte Carlo run.

    Attributes:
        fraction: Share of tasks hit by a failure, in [0, 1]
        restart: Restart failed tasks on the same worker
        penalty: Seconds before a restarted task runs again
        realizations: Number of Monte Carlo realizations
        seed: Seed from which per-realization generators are derived
    """

    fraction: float
    restart: bool = True
    penalty: float = RESTART_PENALTY_S
    realizations: int = DEFAULT_REALIZATIONS
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.fraction <= 1.0:
            raise ArgumentError(f"failure fraction must lie in [0, 1], got {self.fraction}")
        if self.penalty < 0:
            raise ArgumentError(f"restart penalty must be non-negative, got {self.penalty}")
        if self.realizations < 1:
            raise ArgumentError("need at least one realization")


@dataclass(frozen=True)
class ResilienceStats:
    """Resilience factor over the realizations of one scenario."""

    mean: float
    std: float
    samples: np.ndarray
    infeasible: bool = False


def resilience_factor(tts_free: float, tts_event: float) -> float:
    """
    Failure-free time-to-solution over the time-to-solution with failures.

    Raises:
        ArgumentError: If a time is not positive
    """
    if tts_free <= 0 or tts_event <= 0:
        raise ArgumentError("times-to-solution must be positive")
    return tts_free / tts_event


def time_to_solution(
    runtimes: np.ndarray,
    n_workers: int,
    failures: np.ndarray,
    restart: bool,
    penalty: float,
) -> Optional[float]:
    """
    Makespan of a batch where task i fails once after ``failures[i]`` of its run.

    Args:
        runtimes: Task runtimes in seconds
        n_workers: Number of workers
        failures: Failure point per task as a share of its runtime, NaN if unaffected
        restart: Restart on the same worker after ``penalty``
        penalty: Restart penalty in seconds

    Returns:
        Makespan, or None if every worker was lost with tasks left
    """
    workers: List[Tuple[float, int]] = [(0.0, w) for w in range(n_workers)]
    heapq.heapify(workers)
    # (available at, order, task, may fail)
    pending: List[Tuple[float, int, int, bool]] = [(0.0, i, i, True) for i in range(runtimes.size)]
    heapq.heapify(pending)
    order = runtimes.size
    makespan = 0.0
    while pending:
        if not workers:
            return None
        available, _, task, may_fail = heapq.heappop(pending)
        free, w = heapq.heappop(workers)
        start = max(free, available)
        t = float(runtimes[task])
        share = failures[task]
        if not may_fail or np.isnan(share):
            end = start + t
            heapq.heappush(workers, (end, w))
        elif restart:
            end = start + share * t + penalty + t
            heapq.heappush(workers, (end, w))
        else:
            end = start + share * t
            heapq.heappush(pending, (end, order, task, False))
            order += 1
        makespan = max(makespan, end)
    return makespan


def simulate_failures(
    runtimes: Union[RuntimeSample, Sequence[float]],
    scenario: FailureScenario,
    n_workers: Optional[int] = None,
) -> ResilienceStats:
    """
    Monte Carlo estimate of the resilience factor.

    Args:
        runtimes: Task runtimes in seconds
        scenario: Failure model
        n_workers: Number of workers (default: one per task)

    Returns:
        ResilienceStats; when some realization loses every worker the
        factor of that realization is 0 and ``infeasible`` is set
    """
    sample = RuntimeSample.of(runtimes)
    n_workers = len(sample) if n_workers is None else n_workers
    if n_workers < 1:
        raise ArgumentError(f"need at least one worker, got {n_workers}")
    tts_free = list_schedule(sample, n_workers).makespan
    n_hit = int(round(scenario.fraction * len(sample)))

    factors = np.empty(scenario.realizations)
    infeasible = False
    for r in range(scenario.realizations):
        rng = np.random.default_rng([scenario.seed, r])
        failures = np.full(len(sample), np.nan)
        victims = rng.choice(len(sample), size=n_hit, replace=False)
        failures[victims] = rng.uniform(0.0, 1.0, size=n_hit)
        tts = time_to_solution(sample.runtimes, n_workers, failures, scenario.restart, scenario.penalty)
        if tts is None:
            infeasible = True
            factors[r] = 0.0
        else:
            factors[r] = resilience_factor(tts_free, tts)

    stats = ResilienceStats(float(factors.mean()), float(factors.std()), factors, infeasible)
    logger.info(
        "Failure fraction %.2f (restart=%s): resilience %.3f +- %.3f%s",
        scenario.fraction,
        scenario.restart,
        stats.mean,
        stats.std,
        " (infeasible)" if infeasible else "",
    )
    return stats


def resilience_curve(
    runtimes: Union[RuntimeSample, Sequence[float]],
    fractions: Sequence[float],
    restart: bool = True,
    penalty: float = RESTART_PENALTY_S,
    realizations: int = DEFAULT_REALIZATIONS,
    seed: int = 0,
    n_workers: Optional[int] = None,
) -> pd.DataFrame:
    """
    Resilience factor per failure fraction.

    Returns:
        DataFrame with columns fraction, restart, rf_mean, rf_std, infeasible
    """
    rows = []
    for fraction in fractions:
        stats = simulate_failures(
            runtimes, FailureScenario(float(fraction), restart, penalty, realizations, seed), n_workers
        )
        rows.append(
            {
                "fraction": float(fraction),
                "restart": restart,
                "rf_mean": stats.mean,
                "rf_std": stats.std,
                "infeasible": stats.infeasible,
            }
        )
    return pd.DataFrame(rows, columns=["fraction", "restart", "rf_mean", "rf_std", "infeasible"])
