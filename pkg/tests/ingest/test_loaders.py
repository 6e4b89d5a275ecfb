"""This file contains tests for the functions in the loaders.py module."""

import pytest

from multilayer_planner.ingest.loaders import (
    default_spans,
    demands_from_document,
    load_catalog,
    load_demands,
    load_topology,
    topology_from_document,
)
from multilayer_planner.model.exceptions import IngestError
from multilayer_planner.model.types import (
    ProtectionClass,
    RoadmClass,
    ServiceType,
)


def test_default_spans():
    """Links are cut into equal spans of at most 80 km."""
    spans = default_spans(900.0)
    assert len(spans) == 12
    assert spans[0].length_km == pytest.approx(75.0)
    assert spans[0].loss_db == pytest.approx(18.75)
    assert len(default_spans(400.0)) == 5, "400 km is exactly 5 spans."
    assert default_spans(0.0) == []


def test_load_topology(data_dir):
    """The triangle document loads with default spans."""
    topology = load_topology(data_dir / "triangle_topology.yaml")
    assert topology.node_ids == ["A", "B", "C"]
    assert topology.node("A").name == "Alpha"
    assert topology.node("B").roadm_class == RoadmClass.DIRECTIONLESS
    assert topology.link("AC").span_count == 12
    assert sum(
        span.length_km for span in topology.link("AB").spans
    ) == pytest.approx(400.0)


def test_load_topology_syntax_error(data_dir):
    """Malformed YAML is reported with its location."""
    with pytest.raises(IngestError, match="syntax error") as info:
        load_topology(data_dir / "broken.yaml")
    assert info.value.locus is not None
    assert info.value.locus.startswith(str(data_dir / "broken.yaml"))


def test_load_topology_missing_file(tmp_path):
    """A missing file is an ingest error."""
    with pytest.raises(IngestError, match="cannot read"):
        load_topology(tmp_path / "absent.yaml")


def test_top_level_must_be_a_mapping(tmp_path):
    """A YAML list is not a topology."""
    path = tmp_path / "list.yaml"
    path.write_text("- 1\n- 2\n")
    with pytest.raises(IngestError, match="mapping"):
        load_topology(path)


def test_invalid_entity_is_named():
    """Field errors name the entity and its position."""
    with pytest.raises(IngestError, match="invalid link AB") as info:
        topology_from_document(
            {
                "nodes": [{"id": "A"}, {"id": "B"}],
                "links": [
                    {"id": "AB", "a": "A", "b": "B", "length_km": "far"}
                ],
            }
        )
    assert info.value.locus == "links[0]"
    assert any("length_km" in line for line in info.value.diagnostics)


def test_topology_validation_diagnostics():
    """Structural rules are collected into one error."""
    with pytest.raises(IngestError) as info:
        topology_from_document(
            {
                "nodes": [{"id": "A"}, {"id": "B"}, {"id": "C"}],
                "links": [{"id": "AB", "a": "A", "b": "B", "length_km": 80}],
            }
        )
    assert info.value.diagnostics == [
        "topology: graph not connected (2 components)"
    ]


def test_explicit_spans_are_kept():
    """Given spans replace the default split."""
    topology = topology_from_document(
        {
            "nodes": [{"id": "A"}, {"id": "B"}],
            "links": [
                {
                    "id": "AB",
                    "a": "A",
                    "b": "B",
                    "length_km": 100,
                    "spans": [
                        {"length_km": 60, "loss_db": 15},
                        {"length_km": 40, "loss_db": 12},
                    ],
                }
            ],
        }
    )
    assert [span.loss_db for span in topology.link("AB").spans] == [15, 12]


def test_load_demands(data_dir, triangle):
    """Demands load in file order with their sizes."""
    demands = load_demands(data_dir / "long_haul_demands.yaml", triangle)
    assert [item.id for item in demands] == ["D1", "D2"]
    assert demands[1].service_type == ServiceType.ODU2
    assert demands[1].effective_bitrate_gbps == pytest.approx(40.0)
    assert demands[0].protection == ProtectionClass.UNPROTECTED


def test_load_demands_unknown_node(data_dir, triangle):
    """A demand naming a missing node is rejected."""
    with pytest.raises(IngestError) as info:
        load_demands(data_dir / "unknown_node_demands.yaml", triangle)
    assert info.value.diagnostics == ["demand D1: unknown node Z"]


def test_duplicate_demand_ids(triangle):
    """Demand ids are unique."""
    entry = {
        "id": "D1",
        "src": "A",
        "dst": "B",
        "service_type": "ethernet",
        "bitrate_gbps": 10,
    }
    with pytest.raises(IngestError) as info:
        demands_from_document({"demands": [entry, entry]}, triangle)
    assert info.value.diagnostics == ["demand D1: duplicate id"]


def test_demand_explicit_route_nodes_are_checked(triangle):
    """Every node of an explicit route must exist."""
    with pytest.raises(IngestError) as info:
        demands_from_document(
            {
                "demands": [
                    {
                        "id": "D1",
                        "src": "A",
                        "dst": "C",
                        "service_type": "ethernet",
                        "bitrate_gbps": 10,
                        "explicit_route": ["A", "Q", "C"],
                    }
                ]
            },
            triangle,
        )
    assert info.value.diagnostics == ["demand D1: unknown node Q"]


def test_load_catalog(data_dir):
    """The catalog file loads modes, costs and parameters."""
    catalog = load_catalog(data_dir / "catalog.yaml")
    assert [mode.id for mode in catalog.modes] == [
        "100G-QPSK",
        "200G-16QAM",
    ]
    assert catalog.planner_params.k_grooming == 1
    assert catalog.cost("roadm_degree:directionless").power_w == 45
    assert catalog.cost("unknown").cost_units == 0


def test_load_catalog_without_modes(tmp_path):
    """A catalog must list at least one mode."""
    path = tmp_path / "catalog.yaml"
    path.write_text("grid: {kind: flex}\n")
    with pytest.raises(IngestError, match="invalid catalog") as info:
        load_catalog(path)
    assert any("no transponder modes" in d for d in info.value.diagnostics)
