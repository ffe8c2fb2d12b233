"""
Retry utilities for handling transient errors.

This module provides helpers for retrying operations with exponential
backoff. The sleep function is injectable so that callers running on a
simulated clock (the workflow interpreter) wait in simulation time instead
of wall time.
"""
import logging
import time
from functools import wraps
from typing import Any, Callable, Optional, Type, Union

import numpy as np

# Configure logging
logger = logging.getLogger(__name__)


def backoff_delay(
    attempt: int,
    base_delay: float,
    backoff_rate: float = 2.0,
    max_delay: Optional[float] = None,
    jitter_rng: Optional[np.random.Generator] = None,
) -> float:
    """
    Delay before retry number ``attempt`` (1-based).

    Args:
        attempt: Retry attempt number, starting at 1
        base_delay: Delay before the first retry in seconds
        backoff_rate: Multiplier applied per additional attempt
        max_delay: Optional upper bound for the delay
        jitter_rng: When given, adds up to 25% random jitter drawn from it

    Returns:
        Delay in seconds
    """
    delay = base_delay * (backoff_rate ** (attempt - 1))
    if max_delay is not None:
        delay = min(delay, max_delay)
    if jitter_rng is not None:
        delay += float(jitter_rng.uniform(0.0, 0.25)) * delay
    return delay


def retry_with_backoff(
    operation: Callable,
    *args,
    max_retries: int = 3,
    base_delay: float = 1.0,
    backoff_rate: float = 2.0,
    max_delay: Optional[float] = 30.0,
    retry_exceptions: Optional[Union[Type[Exception], tuple]] = None,
    sleep: Callable[[float], None] = time.sleep,
    on_retry: Optional[Callable[[int, Exception, float], None]] = None,
    jitter_rng: Optional[np.random.Generator] = None,
    **kwargs,
) -> Any:
    """
    Retry an operation with exponential backoff.

    Args:
        operation: Callable to retry
        *args: Arguments to pass to the operation
        max_retries: Maximum number of retry attempts
        base_delay: Initial delay between retries in seconds
        backoff_rate: Multiplier applied to the delay after each retry
        max_delay: Maximum delay between retries in seconds
        retry_exceptions: Exception or tuple of exceptions to retry on
                         (default: Exception)
        sleep: Function used to wait between attempts
        on_retry: Called with (attempt, error, delay) before each wait
        jitter_rng: Optional generator used to add jitter to delays
        **kwargs: Keyword arguments to pass to the operation

    Returns:
        Result of the operation

    Raises:
        The last exception raised by the operation if all retries fail
    """
    if retry_exceptions is None:
        retry_exceptions = Exception

    attempt = 0
    while True:
        try:
            return operation(*args, **kwargs)
        except retry_exceptions as e:
            attempt += 1
            if attempt > max_retries:
                logger.error("Operation failed after %d retries: %s", max_retries, e)
                raise

            delay = backoff_delay(attempt, base_delay, backoff_rate, max_delay, jitter_rng)
            logger.info(
                "Retry attempt %d/%d after error: %s. Retrying in %.2f seconds.",
                attempt,
                max_retries,
                e,
                delay,
            )
            if on_retry is not None:
                on_retry(attempt, e, delay)
            sleep(delay)


def with_retry(
    max_retries: int = 3,
    base_delay: float = 1.0,
    backoff_rate: float = 2.0,
    max_delay: Optional[float] = 30.0,
    retry_exceptions: Optional[Union[Type[Exception], tuple]] = None,
):
    """
    Decorator to retry a function with exponential backoff.

    Args:
        max_retries: Maximum number of retry attempts
        base_delay: Initial delay between retries in seconds
        backoff_rate: Multiplier applied to the delay after each retry
        max_delay: Maximum delay between retries in seconds
        retry_exceptions: Exception or tuple of exceptions to retry on

    Returns:
        Decorated function that will retry on failure
    """

    def decorator(func):
        @wraps(func)
        def wrapper(*args, **kwargs):
            return retry_with_backoff(
                func,
                *args,
                max_retries=max_retries,
                base_delay=base_delay,
                backoff_rate=backoff_rate,
                max_delay=max_delay,
                retry_exceptions=retry_exceptions,
                **kwargs,
            )

        return wrapper

    return decorator
