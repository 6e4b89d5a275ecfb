"""This file contains tests for the functions in the graph_conversions.py
module."""

from multilayer_planner.graphs.graph_conversions import (
    fiber_graph_to_networkx,
    virtual_topology_to_networkx,
)
from multilayer_planner.model.types import AdminWeight, VirtualLink


def test_fiber_graph_to_networkx(triangle):
    """Edges carry the link id, length and weight."""
    G = fiber_graph_to_networkx(triangle)
    assert sorted(G.nodes) == ["A", "B", "C"]
    assert G.edges["A", "C"]["link_id"] == "AC"
    assert G.edges["A", "C"]["weight"] == 900.0


def test_fiber_graph_to_networkx_hops(triangle):
    """Hop weights are 1 and lengths are kept."""
    G = fiber_graph_to_networkx(triangle, AdminWeight.HOPS)
    assert G.edges["A", "C"]["weight"] == 1.0
    assert G.edges["A", "C"]["length_km"] == 900.0


def test_fiber_graph_to_networkx_excluded(triangle):
    """Excluded links are left out, nodes are kept."""
    G = fiber_graph_to_networkx(triangle, excluded_links={"AC"})
    assert not G.has_edge("A", "C")
    assert G.number_of_nodes() == 3


def test_virtual_topology_to_networkx():
    """Parallel virtual links become keyed parallel edges."""
    links = [
        VirtualLink(
            id=link_id,
            clp_id=f"clp-{link_id}",
            endpoints=("A", "C"),
            selected_mode="100G-QPSK",
            line_rate_gbps=100,
            length_km=length,
        )
        for link_id, length in [("vl-1", 800.0), ("vl-2", 900.0)]
    ]
    G = virtual_topology_to_networkx(["A", "B", "C"], links)
    assert G.number_of_edges("A", "C") == 2
    assert G["A"]["C"]["vl-2"]["length_km"] == 900.0
    assert "B" in G
