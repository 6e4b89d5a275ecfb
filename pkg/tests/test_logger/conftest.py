"""This file contains fixtures for the LoggerMixin tests."""

import os

import pytest

from multilayer_planner.logger import LoggerMixin


class Worker(LoggerMixin):  # pylint: disable=too-few-public-methods
    """Stands in for a planner class logging to a given file."""


@pytest.fixture
def test_class():
    """A LoggerMixin subclass writing to the default logs directory;
    its file is removed afterwards."""

    class TestClass(LoggerMixin):  # pylint: disable=too-few-public-methods
        """Test class using the LoggerMixin class."""

    instance = TestClass()
    yield instance
    instance.close_logger()
    os.remove(instance.logger_filename)


@pytest.fixture
def make_worker(tmp_path):
    """Factory of Worker instances logging under tmp_path. Handlers
    still open at teardown are closed."""
    workers: list[Worker] = []

    def factory(filename="worker.log", **kwargs):
        worker = Worker(logger_filename=tmp_path / filename, **kwargs)
        workers.append(worker)
        return worker

    yield factory
    for worker in workers:
        if worker.logger_handler in worker.logger.handlers:
            worker.close_logger()
