"""This file contains fixtures for use in the service tests."""

import pytest

from multilayer_planner.service.provisioning import ProvisioningService


class FakeClock:
    """Clock that only moves when told to."""

    def __init__(self):
        self.now = 1000.0

    def __call__(self):
        return self.now

    def advance(self, seconds):
        self.now += seconds


@pytest.fixture
def clock():
    """A manual clock starting at 1000 s."""
    return FakeClock()


@pytest.fixture
def service(triangle, catalog, clock, tmp_path):
    """Fresh service on the triangle with 10 s offers."""
    service = ProvisioningService(
        triangle,
        catalog,
        offer_ttl_s=10.0,
        clock=clock,
        logger_filename=tmp_path / "service.log",
    )
    yield service
    service.close_logger()
