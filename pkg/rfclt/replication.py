"""Concurrent execution of independent replications"""

import asyncio
import logging

from asyncio import Semaphore
from async_timeout import timeout
from concurrent.futures import ThreadPoolExecutor
from logging import Logger
from typing import Callable, List, Optional, TypeVar

_LOG = logging.getLogger(__name__)  # type: Logger

# Worker threads used when nothing else is configured
DEFAULT_THREADS = 4

# Overall limit for one experiment in seconds (None: no limit)
REPLICATION_TIMEOUT = None  # type: Optional[float]

T = TypeVar("T")


class LogExceptions:
    """Utility context manager to log and discard exceptions"""

    def __init__(self, func: str) -> None:
        self.func = func

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc_value, traceback):
        if exc_type:
            _LOG.exception("Exception ignored when calling listener %s", self.func)
        return True


class ReplicationListener:
    """Base class for listeners for replication progress"""

    def replication_done(self, name: str, index: int, count: int) -> None:
        """A single replication has finished (called in completion order)"""

    def experiment_finished(self, name: str, count: int) -> None:
        """All replications of an experiment have finished"""


class ReplicationRunner:
    """Runs replication functions on a thread pool.

    The runner is an asynchronous context manager; the pool is created on
    entry and shut down on exit. Results are always returned in replication
    order, whatever order the threads finish in.
    """

    def __init__(
        self, threads: int = DEFAULT_THREADS, limit: Optional[float] = None
    ) -> None:
        """
        Args:
            threads: worker threads (>= 1)
            limit: seconds allowed per call to run; REPLICATION_TIMEOUT
                applies when omitted
        raises:
            ValueError: for threads < 1
        """
        if threads < 1:
            raise ValueError("Thread count {} must be >= 1".format(threads))
        self._threads = int(threads)
        self._limit = limit
        self._listeners = []  # type: List[ReplicationListener]
        self._executor = None  # type: Optional[ThreadPoolExecutor]

    async def __aenter__(self) -> "ReplicationRunner":
        self.start()
        return self

    async def __aexit__(self, exc_type, exc_value, traceback):
        self.close(wait=exc_type is None)

    def start(self) -> None:
        if self._executor is None:
            _LOG.debug("Starting replication pool with %s threads", self._threads)
            self._executor = ThreadPoolExecutor(
                max_workers=self._threads, thread_name_prefix="rfclt"
            )

    def close(self, wait: bool = True) -> None:
        if self._executor is not None:
            self._executor.shutdown(wait=wait, cancel_futures=not wait)
            self._executor = None

    @property
    def threads(self) -> int:
        return self._threads

    @property
    def is_closed(self) -> bool:
        return self._executor is None

    def add_listener(self, listener: ReplicationListener) -> None:
        self._listeners.append(listener)

    def remove_listener(self, listener: ReplicationListener) -> None:
        self._listeners.remove(listener)

    def _replication_done(self, name: str, index: int, count: int) -> None:
        for listener in self._listeners:
            with LogExceptions("replication_done"):
                listener.replication_done(name, index, count)

    def _experiment_finished(self, name: str, count: int) -> None:
        for listener in self._listeners:
            with LogExceptions("experiment_finished"):
                listener.experiment_finished(name, count)

    async def run(
        self, func: Callable[[int], T], count: int, name: str = "replications"
    ) -> List[T]:
        """Call func(r) for r = 0..count-1 and return the results in order

        raises:
            asyncio.TimeoutError: if the time limit is exceeded
            RuntimeError: if the runner is closed
        """
        if self._executor is None:
            raise RuntimeError("Replication runner is closed")
        loop = asyncio.get_running_loop()
        semaphore = Semaphore(self._threads)
        executor = self._executor

        async def one(index: int) -> T:
            async with semaphore:
                result = await loop.run_in_executor(executor, func, index)
            self._replication_done(name, index, count)
            return result

        limit = self._limit if self._limit is not None else REPLICATION_TIMEOUT
        _LOG.info("Running %s %s (limit %s s)", count, name, limit)
        try:
            async with timeout(limit):
                results = await asyncio.gather(*(one(r) for r in range(count)))
        except asyncio.TimeoutError:
            _LOG.warning("Timed out running %s after %s s", name, limit)
            raise
        self._experiment_finished(name, count)
        return list(results)


async def replicate(
    func: Callable[[int], T],
    count: int,
    runner: Optional[ReplicationRunner] = None,
    name: str = "replications",
) -> List[T]:
    """Run replications on runner, or on a private runner when none is given"""
    if runner is not None:
        return await runner.run(func, count, name)
    async with ReplicationRunner() as private:
        return await private.run(func, count, name)


def replication_runner(
    *listeners: ReplicationListener,
    threads: int = DEFAULT_THREADS,
    limit: Optional[float] = None
) -> ReplicationRunner:
    """Create a replication runner. The returned object is an asynchronous
    context manager so can be used with 'async with' statement."""
    runner = ReplicationRunner(threads=threads, limit=limit)
    for listener in listeners:
        runner.add_listener(listener)
    return runner
