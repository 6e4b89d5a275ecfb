"""This file contains tests for the topology validation."""

from multilayer_planner.model.types import (
    FiberGraph,
    FiberLink,
    NodeSite,
    Span,
)
from multilayer_planner.model.validation import validate_topology


def _link(link_id, a, b, length=80.0, spans=None):
    if spans is None:
        spans = (Span(length_km=length, loss_db=length * 0.25),)
    return FiberLink(id=link_id, a=a, b=b, length_km=length, spans=spans)


def _nodes(*node_ids):
    return tuple(NodeSite(id=node_id) for node_id in node_ids)


def test_triangle_is_valid(triangle):
    """A well formed triangle has no diagnostics."""
    assert validate_topology(triangle) == []


def test_span_sum_mismatch():
    """Span lengths must add up to the link length."""
    topology = FiberGraph(
        nodes=_nodes("A", "B"),
        links=(
            _link(
                "AB",
                "A",
                "B",
                length=100.0,
                spans=(Span(length_km=80.0, loss_db=20.0),),
            ),
        ),
    )
    assert validate_topology(topology) == [
        "link AB: span sum mismatch (80 km spans, length_km=100)"
    ]


def test_unknown_node_self_loop_and_parallel_link():
    """Each structural violation is reported once."""
    topology = FiberGraph(
        nodes=_nodes("A", "B"),
        links=(
            _link("AB", "A", "B"),
            _link("BA", "B", "A"),
            _link("AA", "A", "A"),
            _link("AZ", "A", "Z"),
        ),
    )
    diagnostics = validate_topology(topology)
    assert "link BA: parallel link to AB (use fiber_count)" in diagnostics
    assert "link AA: self loop at A" in diagnostics
    assert "link AZ: unknown node Z" in diagnostics


def test_duplicates_missing_spans_and_disconnection():
    """Duplicate ids, links without spans and islands."""
    topology = FiberGraph(
        nodes=_nodes("A", "B", "C", "D", "D"),
        links=(
            _link("L1", "A", "B"),
            _link("L1", "C", "D", spans=()),
        ),
    )
    diagnostics = validate_topology(topology)
    assert "node D: duplicate id" in diagnostics
    assert "link L1: duplicate id" in diagnostics
    assert "link L1: no spans" in diagnostics
    assert "topology: graph not connected (2 components)" in diagnostics
