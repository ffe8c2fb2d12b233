"""
Idle time and cost of running one batch of gradient tasks.

A batch of n tasks on n workers finishes with the slowest task, so every
other worker idles for ``max(t) - t_i``. Fewer workers are filled by list
scheduling: tasks are taken in the given order and each goes to the first
worker that becomes free.
"""
import heapq
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, List, Sequence, Union

import numpy as np
import pandas as pd

from seisflow.core.errors import ArgumentError, DataError

# Configure logging
logger = logging.getLogger(__name__)

RUNTIME_COLUMN = "runtime_s"


@dataclass(frozen=True)
class RuntimeSample:
    """Per-task runtimes of one batch, in seconds."""

    runtimes: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.runtimes, dtype=np.float64).reshape(-1)
        if values.size == 0:
            raise DataError("a runtime sample needs at least one task")
        if not np.all(np.isfinite(values)) or np.any(values <= 0):
            raise DataError("task runtimes must be positive and finite")
        object.__setattr__(self, "runtimes", values)

    def __len__(self) -> int:
        return int(self.runtimes.size)

    @property
    def count(self) -> int:
        return len(self)

    @property
    def total(self) -> float:
        return float(self.runtimes.sum())

    @property
    def longest(self) -> float:
        return float(self.runtimes.max())

    @classmethod
    def of(cls, runtimes: Union["RuntimeSample", Iterable[float]]) -> "RuntimeSample":
        if isinstance(runtimes, RuntimeSample):
            return runtimes
        return cls(np.asarray(list(runtimes), dtype=np.float64))

    @classmethod
    def from_csv(cls, path: Union[str, Path], column: str = RUNTIME_COLUMN) -> "RuntimeSample":
        """
        Read runtimes from a CSV file with a ``runtime_s`` column.

        Raises:
            DataError: If the file cannot be read or lacks the column
        """
        try:
            frame = pd.read_csv(path)
        except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
            raise DataError(f"cannot read runtimes from {path}: {e}") from e
        if column not in frame.columns:
            raise DataError(f"{path} has no {column!r} column")
        sample = cls(frame[column].to_numpy(dtype=np.float64))
        logger.info("Loaded %d task runtimes from %s (sum %.0f s)", len(sample), path, sample.total)
        return sample


@dataclass(frozen=True)
class Schedule:
    """Assignment of tasks to workers with start and end times."""

    worker: np.ndarray
    start: np.ndarray
    end: np.ndarray
    n_workers: int

    @property
    def makespan(self) -> float:
        return float(self.end.max())

    def busy(self) -> np.ndarray:
        """Busy seconds per worker."""
        out = np.zeros(self.n_workers)
        np.add.at(out, self.worker, self.end - self.start)
        return out

    def idle(self) -> float:
        return float(np.sum(self.makespan - self.busy()))


def _check_workers(n_workers: int) -> None:
    if n_workers < 1:
        raise ArgumentError(f"need at least one worker, got {n_workers}")


def list_schedule(runtimes: Union[RuntimeSample, Sequence[float]], n_workers: int) -> Schedule:
    """
    Assign tasks in order to the first free worker (lowest index on ties).

    Args:
        runtimes: Task runtimes in seconds
        n_workers: Number of workers

    Returns:
        Schedule
    """
    _check_workers(n_workers)
    sample = RuntimeSample.of(runtimes)
    free = [(0.0, w) for w in range(n_workers)]
    heapq.heapify(free)
    worker = np.empty(len(sample), dtype=np.int64)
    start = np.empty(len(sample))
    for i, t in enumerate(sample.runtimes):
        at, w = heapq.heappop(free)
        worker[i], start[i] = w, at
        heapq.heappush(free, (at + t, w))
    return Schedule(worker, start, start + sample.runtimes, n_workers)


def idle_time(runtimes: Union[RuntimeSample, Sequence[float]], n_workers: int) -> float:
    """
    Cumulative idle time of the workers while they wait for the slowest one.

    With at least one worker per task this is ``sum(max(t) - t_i)``;
    otherwise the list schedule's ``sum(makespan - busy_w)``.

    Args:
        runtimes: Task runtimes in seconds
        n_workers: Number of workers

    Returns:
        Idle time in seconds
    """
    _check_workers(n_workers)
    sample = RuntimeSample.of(runtimes)
    if n_workers >= len(sample):
        return float(np.sum(sample.longest - sample.runtimes))
    return list_schedule(sample, n_workers).idle()


def _check_price(price_per_hour: float) -> None:
    if price_per_hour <= 0:
        raise ArgumentError(f"price must be positive, got {price_per_hour}")


def batch_cost(runtimes: Union[RuntimeSample, Sequence[float]], price_per_hour: float) -> float:
    """Cost in $ when every task is billed for its own runtime only."""
    _check_price(price_per_hour)
    return RuntimeSample.of(runtimes).total * price_per_hour / 3600.0


def cluster_cost(
    runtimes: Union[RuntimeSample, Sequence[float]], n_workers: int, price_per_hour: float
) -> float:
    """Cost in $ of ``n_workers`` machines billed until the last task finishes."""
    _check_price(price_per_hour)
    _check_workers(n_workers)
    sample = RuntimeSample.of(runtimes)
    makespan = list_schedule(sample, min(n_workers, len(sample))).makespan
    return n_workers * makespan * price_per_hour / 3600.0


def cost_table(
    runtimes: Union[RuntimeSample, Sequence[float]],
    worker_counts: Sequence[int],
    price_per_hour: float,
) -> pd.DataFrame:
    """
    Idle time and cost of a fixed cluster per size, next to the batch cost.

    Returns:
        DataFrame with columns n_workers, makespan_s, idle_s, cluster_cost,
        batch_cost
    """
    sample = RuntimeSample.of(runtimes)
    rows: List[dict] = []
    batch = batch_cost(sample, price_per_hour)
    for n in worker_counts:
        makespan = list_schedule(sample, min(n, len(sample))).makespan
        rows.append(
            {
                "n_workers": int(n),
                "makespan_s": makespan,
                "idle_s": idle_time(sample, n),
                "cluster_cost": cluster_cost(sample, n, price_per_hour),
                "batch_cost": batch,
            }
        )
    return pd.DataFrame(rows, columns=["n_workers", "makespan_s", "idle_s", "cluster_cost", "batch_cost"])
