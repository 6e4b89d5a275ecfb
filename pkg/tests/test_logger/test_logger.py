"""This file contains tests for the LoggerMixin class."""

import logging
from pathlib import Path


def test_logger(test_class):
    """The default file sits in logs/ and is named after the class."""
    logfile = test_class.logger_filename
    assert Path(logfile).is_file()
    assert logfile.parent == Path("logs")
    assert logfile.name.endswith("_TestClass_.log")
    test_text = "Some test text."
    test_class.logger.error(test_text)
    with open(logfile, "r", encoding="utf8") as file:
        lines = file.readlines()
    assert test_text in lines[0]


def test_logger_custom_file_and_format(make_worker, tmp_path):
    """A custom file, format and level are honoured."""
    worker = make_worker(
        "nested/custom.log",
        logger_format="Extra stuff: %(levelname)s %(message)s",
        logger_level=logging.WARNING,
    )
    worker.logger.info("hidden")
    worker.logger.warning("shown")
    worker.close_logger()
    text = (tmp_path / "nested" / "custom.log").read_text()
    assert text == "Extra stuff: WARNING shown\n"


def test_logger_reuses_handler(make_worker, tmp_path):
    """Two instances logging to one file share a handler."""
    first = make_worker("shared.log")
    second = make_worker("shared.log")
    assert first.logger_handler is second.logger_handler
    second.logger.info("once")
    first.close_logger()
    assert first.logger_handler not in first.logger.handlers
    assert (tmp_path / "shared.log").read_text().count("once") == 1


def test_logger_name_follows_class_hierarchy(make_worker):
    """The logger is named after the class hierarchy."""
    worker = make_worker()
    assert worker.logger.name == "LoggerMixin.Worker"
