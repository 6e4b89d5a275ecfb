"""This file contains code for the generation of random
fiber topologies and demand matrices, used for sweeps and
randomized property checks."""

import itertools

import networkx
import numpy

from multilayer_planner.ingest.loaders import default_spans
from multilayer_planner.model.types import (
    Demand,
    FiberGraph,
    FiberLink,
    NodeSite,
    ServiceType,
)


def generate_random_topology(
    v: int,
    e: int,
    seed: int | None = None,
    min_length_km: float = 50.0,
    max_length_km: float = 800.0,
) -> FiberGraph:
    """Generates a random connected fiber topology with v nodes
    and e links.

    A random spanning tree is laid first so the graph is always
    connected; the remaining links are drawn uniformly among the
    missing node pairs. Link lengths are uniform in
    [min_length_km, max_length_km], rounded to 1 km, with
    default 80 km spans.

    Args:
        v (int): Number of nodes.
        e (int): Number of links.
        seed (int | None): Random seed. Defaults to None.
        min_length_km (float): Shortest link. Defaults to 50.
        max_length_km (float): Longest link. Defaults to 800.

    Returns:
        FiberGraph: The generated topology; node ids are "N0",
            "N1", ...

    Raises:
        ValueError: If e cannot connect v nodes or exceeds the
            number of node pairs.
    """
    if v > 0 and not v - 1 <= e <= v * (v - 1) // 2:
        raise ValueError(f"{e} links cannot form a simple connected graph.")
    rng = numpy.random.default_rng(seed)
    tree = networkx.random_labeled_tree(v, seed=seed) if v > 1 else None
    pairs: list[tuple[int, int]] = (
        [tuple(sorted(edge)) for edge in tree.edges] if tree else []
    )
    taken = set(pairs)
    missing = [
        pair
        for pair in itertools.combinations(range(v), 2)
        if pair not in taken
    ]
    extra = rng.choice(len(missing), size=e - len(pairs), replace=False)
    pairs.extend(missing[index] for index in sorted(extra))

    nodes = tuple(NodeSite(id=f"N{i}", name=f"Node {i}") for i in range(v))
    links = []
    for index, (i, j) in enumerate(sorted(pairs)):
        length = float(round(rng.uniform(min_length_km, max_length_km)))
        links.append(
            FiberLink(
                id=f"L{index}",
                a=f"N{i}",
                b=f"N{j}",
                length_km=length,
                spans=tuple(default_spans(length)),
            )
        )
    return FiberGraph(nodes=nodes, links=tuple(links))


def generate_uniform_demands(
    topology: FiberGraph,
    bitrate_gbps: float,
    service_type: ServiceType = ServiceType.ETHERNET,
) -> list[Demand]:
    """Creates one demand of equal bitrate for every node pair.

    Args:
        topology (FiberGraph): The topology.
        bitrate_gbps (float): Bitrate per node pair.
        service_type (ServiceType): A packet service type.
            Defaults to ethernet.

    Returns:
        list[Demand]: Demands "D<src>-<dst>" in node order.
    """
    return [
        Demand(
            id=f"D{src}-{dst}",
            src=src,
            dst=dst,
            service_type=service_type,
            bitrate_gbps=bitrate_gbps,
        )
        for src, dst in itertools.combinations(topology.node_ids, 2)
    ]


def generate_random_demands(
    topology: FiberGraph,
    count: int,
    seed: int | None = None,
    min_gbps: float = 1.0,
    max_gbps: float = 100.0,
) -> list[Demand]:
    """Draws random ethernet demands between random node pairs.

    Args:
        topology (FiberGraph): The topology.
        count (int): Number of demands.
        seed (int | None): Random seed. Defaults to None.
        min_gbps (float): Smallest bitrate. Defaults to 1.
        max_gbps (float): Largest bitrate. Defaults to 100.

    Returns:
        list[Demand]: Demands "R0", "R1", ... with bitrates
            rounded to 1 Gbps.
    """
    rng = numpy.random.default_rng(seed)
    node_ids = topology.node_ids
    demands = []
    for index in range(count):
        src, dst = rng.choice(len(node_ids), size=2, replace=False)
        demands.append(
            Demand(
                id=f"R{index}",
                src=node_ids[src],
                dst=node_ids[dst],
                service_type=ServiceType.ETHERNET,
                bitrate_gbps=float(
                    max(1, round(rng.uniform(min_gbps, max_gbps)))
                ),
            )
        )
    return demands
