"""
Async bridge helpers.

Synchronous callers (the CLI, the in-process backend) use AsyncBridge to run
coroutines, and map_in_executor fans CPU-bound work out to a thread pool
while keeping results in submission order.
"""
import asyncio
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Iterable, List, TypeVar

T = TypeVar("T")


class AsyncBridge:
    """
    Bridge adapter that converts asynchronous calls to synchronous calls.
    """

    @staticmethod
    def run_async(async_func: Callable[..., Any], *args: Any, **kwargs: Any) -> Any:
        """
        Run an asynchronous function in a synchronous context.

        Args:
            async_func: The asynchronous function to run
            *args: Positional arguments to pass to the async function
            **kwargs: Keyword arguments to pass to the async function

        Returns:
            The result of the asynchronous function

        Raises:
            Exception: Any exception raised by the async function
        """
        loop = asyncio.new_event_loop()
        try:
            return loop.run_until_complete(async_func(*args, **kwargs))
        finally:
            loop.close()


async def map_in_executor(
    func: Callable[..., T], items: Iterable[Any], max_workers: int = 1
) -> List[T]:
    """
    Apply ``func`` to every item on a thread pool.

    Args:
        func: Function taking one item
        items: Inputs
        max_workers: Pool size

    Returns:
        Results in the order of ``items``
    """
    loop = asyncio.get_running_loop()
    with ThreadPoolExecutor(max_workers=max(1, max_workers)) as executor:
        tasks = [loop.run_in_executor(executor, func, item) for item in items]
        return list(await asyncio.gather(*tasks))
