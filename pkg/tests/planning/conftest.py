"""This file contains fixtures for use in the planning tests."""

import pytest

from multilayer_planner.planning.clp import build_clp_graph


@pytest.fixture
def triangle_clp(triangle, catalog):
    """Candidate graph of the triangle with the default catalog."""
    return build_clp_graph(triangle, catalog)


@pytest.fixture
def log_file(tmp_path):
    """Log file for the logging planner classes."""
    return tmp_path / "planner.log"
