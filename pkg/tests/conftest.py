"""This file contains fixtures for use in pytest unit tests."""

from pathlib import Path

import pytest

from multilayer_planner.ingest.catalog import (
    Catalog,
    CostEntry,
    PlannerParams,
)
from multilayer_planner.ingest.loaders import topology_from_document
from multilayer_planner.model.types import (
    Demand,
    FiberGraph,
    GridSpec,
    ServiceType,
    TransponderMode,
)

DATA_DIR = Path(__file__).parent / "data"

QPSK = TransponderMode(
    id="100G-QPSK",
    line_rate_gbps=100,
    modulation="QPSK",
    slot_width_ghz=37.5,
    fixed_channel=True,
    required_osnr_db=12,
    max_reach_km=2000,
    roadm_passthrough_penalty_db=0.5,
    cost_units=1.0,
    power_w=50,
)

QAM16 = TransponderMode(
    id="200G-16QAM",
    line_rate_gbps=200,
    modulation="16QAM",
    slot_width_ghz=37.5,
    required_osnr_db=20,
    max_reach_km=600,
    roadm_passthrough_penalty_db=0.5,
    cost_units=1.5,
    power_w=70,
)

COST_TABLE = {
    "amplifier": CostEntry(cost_units=0.2, power_w=30),
    "fiber_km": CostEntry(cost_units=0.001),
    "shelf": CostEntry(cost_units=0.5, power_w=100),
    "protection_module": CostEntry(cost_units=0.1, power_w=5),
    "roadm_degree:fixed": CostEntry(cost_units=0.4, power_w=40),
}


def make_catalog(
    modes: tuple[TransponderMode, ...] = (QPSK, QAM16),
    grid: GridSpec | None = None,
    **params,
) -> Catalog:
    """Catalog with the two test modes and k_grooming=1,
    threshold 0.5 unless overridden.

    Args:
        modes (tuple[TransponderMode, ...]): Modes.
        grid (GridSpec | None): Grid. Defaults to 384 flex slots.
        **params: Planner parameter overrides.

    Returns:
        Catalog: The catalog.
    """
    planner_params = PlannerParams.model_validate(
        {"k_grooming": 1, "grooming_threshold": 0.5} | params
    )
    return Catalog(
        modes=modes,
        grid=grid or GridSpec(),
        cost_table=COST_TABLE,
        planner_params=planner_params,
    )


def make_topology(
    nodes: list[str], links: list[tuple[str, str, str, float]]
) -> FiberGraph:
    """Topology with default 80 km spans.

    Args:
        nodes (list[str]): Node ids.
        links (list[tuple[str, str, str, float]]): (id, a, b,
            length_km) per link.

    Returns:
        FiberGraph: The validated topology.
    """
    return topology_from_document(
        {
            "nodes": [{"id": node_id} for node_id in nodes],
            "links": [
                {"id": link_id, "a": a, "b": b, "length_km": length}
                for link_id, a, b, length in links
            ],
        }
    )


def demand(
    demand_id: str, src: str, dst: str, gbps: float, **fields
) -> Demand:
    """An ethernet demand."""
    return Demand(
        id=demand_id,
        src=src,
        dst=dst,
        service_type=ServiceType.ETHERNET,
        bitrate_gbps=gbps,
        **fields,
    )


@pytest.fixture
def data_dir():
    """Directory of the on-disk test documents."""
    return DATA_DIR


@pytest.fixture
def catalog():
    """Flex grid catalog: 100G-QPSK (reach 2000 km) and
    200G-16QAM (reach 600 km), both 37.5 GHz = 3 slots."""
    return make_catalog()


@pytest.fixture
def catalog_factory():
    """Builds catalogs with planner parameter overrides."""
    return make_catalog


@pytest.fixture
def triangle():
    """Triangle A-B 400 km, B-C 400 km, A-C 900 km."""
    return make_topology(
        ["A", "B", "C"],
        [
            ("AB", "A", "B", 400.0),
            ("BC", "B", "C", 400.0),
            ("AC", "A", "C", 900.0),
        ],
    )


@pytest.fixture
def path_graph():
    """Path A-B-C, 400 km links; no disjoint pairs."""
    return make_topology(
        ["A", "B", "C"],
        [("AB", "A", "B", 400.0), ("BC", "B", "C", 400.0)],
    )


@pytest.fixture
def ring():
    """6-node ring N0..N5 of 100 km links."""
    nodes = [f"N{i}" for i in range(6)]
    return make_topology(
        nodes,
        [
            (f"L{i}", nodes[i], nodes[(i + 1) % 6], 100.0)
            for i in range(6)
        ],
    )


@pytest.fixture
def ring_catalog():
    """Single 100 G mode, k_grooming=2."""
    return make_catalog(modes=(QPSK,), k_grooming=2)


@pytest.fixture
def demand_factory():
    """Builds ethernet demands."""
    return demand
