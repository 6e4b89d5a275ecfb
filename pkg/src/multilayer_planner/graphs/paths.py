"""This file contains the path algorithms of the planner:
k-shortest simple fiber paths, shortest disjoint path pairs,
per-failure restoration paths, and k-shortest edge sequences
over the multigraph layers (candidate lightpaths, virtual
links).

Ties between equal-weight paths are broken by comparing the
node-id sequences lexicographically, so every result is
independent of graph insertion order.
"""

import itertools
from collections import Counter
from collections.abc import Collection, Hashable

import networkx

from multilayer_planner.graphs.graph_conversions import (
    fiber_graph_to_networkx,
)
from multilayer_planner.model.types import (
    AdminWeight,
    Disjointness,
    FiberGraph,
    FrozenModel,
)

WEIGHT_DIGITS = 6


class FiberPath(FrozenModel):
    """A simple path in the fiber graph."""

    links: tuple[str, ...]
    nodes: tuple[str, ...]
    weight: float

    @property
    def sort_key(self) -> tuple[float, tuple[str, ...]]:
        """Weight first, then node sequence."""
        return (round(self.weight, WEIGHT_DIGITS), self.nodes)


class EdgePath(FrozenModel):
    """A simple path in a multigraph layer, as the node sequence
    and the keys of the parallel edges taken."""

    nodes: tuple[str, ...]
    keys: tuple[str, ...]
    length_km: float

    @property
    def hops(self) -> int:
        """Number of edges."""
        return len(self.keys)

    @property
    def sort_key(
        self,
    ) -> tuple[int, float, tuple[str, ...], tuple[str, ...]]:
        """Hops, then underlying length, then nodes and keys."""
        return (
            self.hops,
            round(self.length_km, WEIGHT_DIGITS),
            self.nodes,
            self.keys,
        )


def _check_endpoints(topology: FiberGraph, src: str, dst: str) -> None:
    if src == dst:
        raise ValueError(f"src and dst are both {src}.")
    topology.node(src)
    topology.node(dst)


def _to_fiber_path(G: networkx.Graph, nodes: list[str]) -> FiberPath:
    links = []
    weight = 0.0
    for u, v in zip(nodes, nodes[1:]):
        data = G.edges[u, v]
        links.append(data["link_id"])
        weight += data["weight"]
    return FiberPath(links=tuple(links), nodes=tuple(nodes), weight=weight)


def _lightest_simple_paths(
    G: networkx.Graph, src: str, dst: str, k: int
) -> list[FiberPath]:
    """First k simple paths by (weight, node sequence).

    Yen's enumeration yields paths in non-decreasing weight; all
    paths tying with the k-th are collected before sorting so the
    tie-break is exact.
    """
    found: list[FiberPath] = []
    try:
        for nodes in networkx.shortest_simple_paths(G, src, dst, "weight"):
            path = _to_fiber_path(G, nodes)
            if len(found) >= k and path.sort_key[0] > found[k - 1].sort_key[0]:
                break
            found.append(path)
    except networkx.NetworkXNoPath:
        return []
    return sorted(found, key=lambda path: path.sort_key)[:k]


def k_shortest_paths(
    topology: FiberGraph,
    src: str,
    dst: str,
    k: int,
    weight: AdminWeight = AdminWeight.LENGTH_KM,
    excluded_links: Collection[str] = (),
) -> list[FiberPath]:
    """Computes the k lightest simple fiber paths.

    Args:
        topology (FiberGraph): The fiber graph.
        src (str): Source node id.
        dst (str): Destination node id.
        k (int): Maximum number of paths.
        weight (AdminWeight): Edge weight. Defaults to length.
        excluded_links (Collection[str]): Links to ignore.
            Defaults to none.

    Returns:
        list[FiberPath]: At most k distinct simple paths in
            ascending (weight, node sequence) order; empty when
            the nodes are disconnected.

    Raises:
        ValueError: If src equals dst or k < 1.
        UnknownEntityError: If an endpoint is not in the graph.
    """
    _check_endpoints(topology, src, dst)
    if k < 1:
        raise ValueError(f"k must be positive, got {k}.")
    G = fiber_graph_to_networkx(topology, weight, excluded_links)
    return _lightest_simple_paths(G, src, dst, k)


def _disjoint_search_graph(
    G: networkx.Graph, disjointness: Disjointness
) -> networkx.DiGraph:
    """Directed search graph in which arc-disjoint paths are
    link- (or node-) disjoint paths of G. Node-disjointness
    splits every node into an (in, out) arc of weight 0."""
    H = networkx.DiGraph()
    if disjointness == Disjointness.NODE:
        for node in G.nodes:
            H.add_edge((node, 0), (node, 1), weight=0.0)
        for u, v, data in G.edges(data=True):
            H.add_edge((u, 1), (v, 0), weight=data["weight"])
            H.add_edge((v, 1), (u, 0), weight=data["weight"])
    else:
        for u, v, data in G.edges(data=True):
            H.add_edge(u, v, weight=data["weight"])
            H.add_edge(v, u, weight=data["weight"])
    return H


def _arc_disjoint_pair(
    H: networkx.DiGraph, source: Hashable, target: Hashable
) -> tuple[list, list] | None:
    """Suurballe/Bhandari: the two arc-disjoint source-target
    paths of least total weight."""
    try:
        first = networkx.dijkstra_path(H, source, target, weight="weight")
    except networkx.NetworkXNoPath:
        return None
    first_arcs = list(zip(first, first[1:]))
    residual = H.copy()
    for a, b in first_arcs:
        arc_weight = H.edges[a, b]["weight"]
        residual.remove_edge(a, b)
        residual.add_edge(b, a, weight=-arc_weight)
    try:
        second = networkx.bellman_ford_path(
            residual, source, target, weight="weight"
        )
    except networkx.NetworkXNoPath:
        return None

    arcs: Counter = Counter(first_arcs)
    for a, b in zip(second, second[1:]):
        if arcs[(b, a)] > 0:
            arcs[(b, a)] -= 1
        else:
            arcs[(a, b)] += 1
    successors: dict[Hashable, list[Hashable]] = {}
    for (a, b), count in arcs.items():
        successors.setdefault(a, []).extend([b] * count)
    for targets in successors.values():
        targets.sort(key=str)

    paths = []
    for _ in range(2):
        walk = [source]
        while walk[-1] != target:
            walk.append(successors[walk[-1]].pop(0))
        paths.append(walk)
    return paths[0], paths[1]


def _collapse_split_nodes(walk: list) -> list[str]:
    nodes: list[str] = []
    for node in walk:
        name = node[0] if isinstance(node, tuple) else node
        if not nodes or nodes[-1] != name:
            nodes.append(name)
    return nodes


def shortest_disjoint_pair(
    topology: FiberGraph,
    src: str,
    dst: str,
    disjointness: Disjointness = Disjointness.LINK,
    weight: AdminWeight = AdminWeight.LENGTH_KM,
) -> tuple[FiberPath, FiberPath] | None:
    """Computes the pair of disjoint fiber paths with the least
    total weight.

    Args:
        topology (FiberGraph): The fiber graph.
        src (str): Source node id.
        dst (str): Destination node id.
        disjointness (Disjointness): Link- or node-disjoint.
            Defaults to link.
        weight (AdminWeight): Edge weight. Defaults to length.

    Returns:
        tuple[FiberPath, FiberPath] | None: The pair ordered by
            (weight, node sequence), or None if no disjoint pair
            exists.

    Raises:
        ValueError: If src equals dst.
        UnknownEntityError: If an endpoint is not in the graph.
    """
    _check_endpoints(topology, src, dst)
    G = fiber_graph_to_networkx(topology, weight)
    H = _disjoint_search_graph(G, disjointness)
    if disjointness == Disjointness.NODE:
        pair = _arc_disjoint_pair(H, (src, 1), (dst, 0))
    else:
        pair = _arc_disjoint_pair(H, src, dst)
    if pair is None:
        return None
    paths = sorted(
        (_to_fiber_path(G, _collapse_split_nodes(walk)) for walk in pair),
        key=lambda path: path.sort_key,
    )
    return paths[0], paths[1]


def restoration_paths(
    topology: FiberGraph,
    src: str,
    dst: str,
    failed_link: str,
    k: int,
    weight: AdminWeight = AdminWeight.LENGTH_KM,
) -> list[FiberPath]:
    """Computes k-shortest paths with one fiber link failed.

    Args:
        topology (FiberGraph): The fiber graph.
        src (str): Source node id.
        dst (str): Destination node id.
        failed_link (str): Id of the failed link.
        k (int): Maximum number of paths.
        weight (AdminWeight): Edge weight. Defaults to length.

    Returns:
        list[FiberPath]: As k_shortest_paths on the graph
            without the failed link.

    Raises:
        UnknownEntityError: If failed_link is not in the graph.
    """
    topology.link(failed_link)
    return k_shortest_paths(
        topology, src, dst, k, weight, excluded_links={failed_link}
    )


def k_shortest_edge_paths(
    G: networkx.MultiGraph, src: str, dst: str, k: int
) -> list[EdgePath]:
    """Computes the k shortest simple paths of a multigraph by
    hop count, treating parallel edges as distinct paths.

    Args:
        G (networkx.MultiGraph): Graph with edges keyed by id and
            carrying "length_km".
        src (str): Source node id.
        dst (str): Destination node id.
        k (int): Maximum number of paths.

    Returns:
        list[EdgePath]: At most k paths ordered by hops, then
            underlying length, then node and key sequences.
    """
    if src not in G or dst not in G or src == dst:
        return []
    simple = networkx.Graph(G)
    found: list[EdgePath] = []
    cutoff_hops: int | None = None
    try:
        for nodes in networkx.shortest_simple_paths(simple, src, dst):
            hops = len(nodes) - 1
            if cutoff_hops is not None and hops > cutoff_hops:
                break
            choices = [
                sorted(G[u][v], key=str) for u, v in zip(nodes, nodes[1:])
            ]
            for keys in itertools.product(*choices):
                length = sum(
                    G[u][v][key]["length_km"]
                    for (u, v), key in zip(zip(nodes, nodes[1:]), keys)
                )
                found.append(
                    EdgePath(
                        nodes=tuple(nodes), keys=tuple(keys), length_km=length
                    )
                )
            if cutoff_hops is None and len(found) >= k:
                cutoff_hops = hops
    except networkx.NetworkXNoPath:
        return []
    return sorted(found, key=lambda path: path.sort_key)[:k]


def path_rank(
    topology: FiberGraph,
    path: FiberPath,
    weight: AdminWeight = AdminWeight.LENGTH_KM,
) -> int:
    """Position of a path in the k_shortest_paths order.

    Args:
        topology (FiberGraph): The fiber graph.
        path (FiberPath): A simple path of the graph.
        weight (AdminWeight): Edge weight the path was weighed
            with. Defaults to length.

    Returns:
        int: k such that the path is the k-th shortest (1-based).
    """
    G = fiber_graph_to_networkx(topology, weight)
    target = path.sort_key
    rank = 1
    for nodes in networkx.shortest_simple_paths(
        G, path.nodes[0], path.nodes[-1], "weight"
    ):
        other = _to_fiber_path(G, nodes)
        if other.sort_key[0] > target[0]:
            break
        if other.sort_key < target:
            rank += 1
    return rank
