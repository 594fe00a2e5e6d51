"""Test the replication runner"""

import asyncio
import time

from pytest import mark, raises

from rfclt.replication import (
    ReplicationListener,
    ReplicationRunner,
    replicate,
    replication_runner,
)


def slow_identity(r: int) -> int:
    # later replications finish first
    time.sleep(0.01 * (5 - r))
    return r


@mark.asyncio
async def test_results_in_replication_order(mocker):
    listener = mocker.Mock(spec=ReplicationListener)
    async with replication_runner(listener, threads=3) as runner:
        assert runner.threads == 3
        assert not runner.is_closed
        results = await runner.run(slow_identity, 5, "order")
    assert results == [0, 1, 2, 3, 4]
    assert runner.is_closed
    assert listener.replication_done.call_count == 5
    listener.experiment_finished.assert_called_once_with("order", 5)


@mark.asyncio
async def test_listener_exceptions_are_logged():
    class BrokenListener(ReplicationListener):
        def replication_done(self, name, index, count):
            raise RuntimeError("listener failure")

    async with replication_runner(BrokenListener()) as runner:
        assert await runner.run(lambda r: r * r, 4) == [0, 1, 4, 9]


@mark.asyncio
async def test_replicate_without_runner():
    assert await replicate(lambda r: -r, 3) == [0, -1, -2]


@mark.asyncio
async def test_timeout(mocker):
    mocker.patch("rfclt.replication.REPLICATION_TIMEOUT", 0.05)

    async with ReplicationRunner(threads=2) as runner:
        with raises(asyncio.TimeoutError):
            await runner.run(lambda r: time.sleep(0.5), 4)

    async with ReplicationRunner(limit=0.05) as runner:
        with raises(asyncio.TimeoutError):
            await runner.run(lambda r: time.sleep(0.5), 1)


@mark.asyncio
async def test_runner_errors():
    with raises(ValueError):
        ReplicationRunner(threads=0)

    runner = ReplicationRunner()
    with raises(RuntimeError):
        await runner.run(lambda r: r, 1)

    async with ReplicationRunner() as runner:
        with raises(ZeroDivisionError):
            await runner.run(lambda r: 1 / (r - 2), 3)
