"""This file contains code for the converting of planner
graphs (fiber graph, candidate lightpath graph, virtual
topology) into networkx graphs."""

from collections.abc import Collection, Iterable

import networkx

from multilayer_planner.model.types import (
    AdminWeight,
    CandidateLightpath,
    FiberGraph,
    FiberLink,
    VirtualLink,
)


def link_weight(link: FiberLink, weight: AdminWeight) -> float:
    """The administrative weight of a fiber link.

    Args:
        link (FiberLink): The link.
        weight (AdminWeight): Hop count or length.

    Returns:
        float: 1 for hops, the link length otherwise.
    """
    if weight == AdminWeight.HOPS:
        return 1.0
    return link.length_km


def fiber_graph_to_networkx(
    topology: FiberGraph,
    weight: AdminWeight = AdminWeight.LENGTH_KM,
    excluded_links: Collection[str] = (),
) -> networkx.Graph:
    """This function converts a FiberGraph into an undirected
    networkx.Graph.

    Args:
        topology (FiberGraph): Graph to convert.
        weight (AdminWeight): Which quantity to store in the
            "weight" edge attribute. Defaults to length.
        excluded_links (Collection[str]): Link ids to leave out,
            e.g. a failed link. Defaults to none.

    Returns:
        networkx.Graph: Nodes are node ids; each edge carries
            "link_id", "weight" and "length_km".
    """
    G = networkx.Graph()
    G.add_nodes_from(topology.node_ids)
    for link in topology.links:
        if link.id in excluded_links:
            continue
        G.add_edge(
            link.a,
            link.b,
            link_id=link.id,
            weight=link_weight(link, weight),
            length_km=link.length_km,
        )
    return G


def clp_graph_to_networkx(
    node_ids: Iterable[str],
    candidates: Iterable[CandidateLightpath],
) -> networkx.MultiGraph:
    """This function converts candidate lightpaths into a
    networkx.MultiGraph with one edge per candidate, keyed by
    candidate id.

    Args:
        node_ids (Iterable[str]): All node ids.
        candidates (Iterable[CandidateLightpath]): The edges.

    Returns:
        networkx.MultiGraph: Edges carry "length_km".
    """
    G = networkx.MultiGraph()
    G.add_nodes_from(node_ids)
    for clp in candidates:
        G.add_edge(*clp.endpoints, key=clp.id, length_km=clp.length_km)
    return G


def virtual_topology_to_networkx(
    node_ids: Iterable[str],
    links: Iterable[VirtualLink],
) -> networkx.MultiGraph:
    """This function converts a virtual topology into a
    networkx.MultiGraph with one edge per virtual link, keyed by
    virtual link id.

    Args:
        node_ids (Iterable[str]): All node ids.
        links (Iterable[VirtualLink]): The edges.

    Returns:
        networkx.MultiGraph: Edges carry "length_km".
    """
    G = networkx.MultiGraph()
    G.add_nodes_from(node_ids)
    for link in links:
        G.add_edge(*link.endpoints, key=link.id, length_km=link.length_km)
    return G
