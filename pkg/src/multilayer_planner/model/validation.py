"""This file contains the structural validation of a fiber
graph."""

import math
from collections import Counter

import networkx

from multilayer_planner.model.types import FiberGraph

SPAN_SUM_TOLERANCE_KM = 1e-6


def validate_topology(topology: FiberGraph) -> list[str]:
    """Checks a fiber graph against its structural rules.

    Args:
        topology (FiberGraph): The graph to check.

    Returns:
        list[str]: One diagnostic per violated rule, each naming
            the offending entity. Empty when the graph is well
            formed and connected.
    """
    diagnostics: list[str] = []
    node_counts = Counter(topology.node_ids)
    for node_id, count in node_counts.items():
        if count > 1:
            diagnostics.append(f"node {node_id}: duplicate id")
    link_counts = Counter(link.id for link in topology.links)
    for link_id, count in link_counts.items():
        if count > 1:
            diagnostics.append(f"link {link_id}: duplicate id")

    seen_pairs: dict[frozenset[str], str] = {}
    for link in topology.links:
        for end in link.endpoints:
            if end not in node_counts:
                diagnostics.append(f"link {link.id}: unknown node {end}")
        if link.a == link.b:
            diagnostics.append(f"link {link.id}: self loop at {link.a}")
            continue
        pair = frozenset(link.endpoints)
        if pair in seen_pairs:
            diagnostics.append(
                f"link {link.id}: parallel link to {seen_pairs[pair]}"
                " (use fiber_count)"
            )
        else:
            seen_pairs[pair] = link.id
        if not link.spans:
            diagnostics.append(f"link {link.id}: no spans")
            continue
        span_sum = sum(span.length_km for span in link.spans)
        if not math.isclose(
            span_sum, link.length_km, rel_tol=0, abs_tol=SPAN_SUM_TOLERANCE_KM
        ):
            diagnostics.append(
                f"link {link.id}: span sum mismatch "
                f"({span_sum:g} km spans, length_km={link.length_km:g})"
            )

    graph = networkx.Graph()
    graph.add_nodes_from(node_counts)
    graph.add_edges_from(
        link.endpoints
        for link in topology.links
        if link.a in node_counts and link.b in node_counts
    )
    if graph.number_of_nodes() > 0 and not networkx.is_connected(graph):
        components = networkx.number_connected_components(graph)
        diagnostics.append(
            f"topology: graph not connected ({components} components)"
        )
    return diagnostics
