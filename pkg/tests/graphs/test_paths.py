"""This file contains tests for the functions in the paths.py module."""

import itertools

import networkx
import pytest

from multilayer_planner.graphs.generate_random_graph import (
    generate_random_topology,
)
from multilayer_planner.graphs.graph_conversions import (
    fiber_graph_to_networkx,
)
from multilayer_planner.graphs.paths import (
    FiberPath,
    k_shortest_edge_paths,
    k_shortest_paths,
    path_rank,
    restoration_paths,
    shortest_disjoint_pair,
)
from multilayer_planner.model.exceptions import UnknownEntityError
from multilayer_planner.model.types import AdminWeight, Disjointness
from tests.conftest import make_topology


def _all_simple_paths(topology, src, dst, weight=AdminWeight.LENGTH_KM):
    """Brute force: every simple path in (weight, nodes) order."""
    G = fiber_graph_to_networkx(topology, weight)
    paths = []
    for nodes in networkx.all_simple_paths(G, src, dst):
        pairs = list(zip(nodes, nodes[1:]))
        paths.append(
            FiberPath(
                links=tuple(G.edges[u, v]["link_id"] for u, v in pairs),
                nodes=tuple(nodes),
                weight=sum(G.edges[u, v]["weight"] for u, v in pairs),
            )
        )
    return sorted(paths, key=lambda path: path.sort_key)


def _best_disjoint_weight(topology, src, dst, disjointness):
    """Brute force: least total weight of a disjoint pair."""
    paths = _all_simple_paths(topology, src, dst)
    best = None
    for first, second in itertools.combinations(paths, 2):
        if set(first.links) & set(second.links):
            continue
        if disjointness == Disjointness.NODE and set(
            first.nodes[1:-1]
        ) & set(second.nodes[1:-1]):
            continue
        total = first.weight + second.weight
        if best is None or total < best:
            best = total
    return best


def _random_topology(seed):
    """Random topology of 4 to 8 nodes, sized by the seed."""
    v = 4 + seed % 5
    e = v - 1 + (seed // 5) % (v // 2 + 1)
    return generate_random_topology(v, e, seed=seed)


@pytest.fixture
def square():
    """4-node ring A-B-C-D-A."""
    return make_topology(
        ["A", "B", "C", "D"],
        [
            ("AB", "A", "B", 100.0),
            ("BC", "B", "C", 100.0),
            ("CD", "C", "D", 120.0),
            ("DA", "D", "A", 120.0),
        ],
    )


def test_k_shortest_paths_triangle(triangle):
    """Tests the function k_shortest_paths on the triangle."""
    paths = k_shortest_paths(triangle, "A", "C", 2)
    assert [path.nodes for path in paths] == [("A", "B", "C"), ("A", "C")]
    assert [path.weight for path in paths] == [800.0, 900.0]
    assert paths[0].links == ("AB", "BC")


def test_k_shortest_paths_fewer_than_k(triangle):
    """Only the existing simple paths are returned."""
    assert len(k_shortest_paths(triangle, "A", "C", 5)) == 2


def test_k_shortest_paths_hops(triangle):
    """With hop weights the direct link comes first."""
    paths = k_shortest_paths(triangle, "A", "C", 2, AdminWeight.HOPS)
    assert paths[0].nodes == ("A", "C")


def test_k_shortest_paths_ties_by_node_sequence():
    """Equal weights are ordered by node ids."""
    tied = make_topology(
        ["A", "B", "C", "D"],
        [
            ("AD", "A", "D", 100.0),
            ("DC", "D", "C", 100.0),
            ("AB", "A", "B", 100.0),
            ("BC", "B", "C", 100.0),
        ],
    )
    paths = k_shortest_paths(tied, "A", "C", 2)
    assert [path.nodes for path in paths] == [
        ("A", "B", "C"),
        ("A", "D", "C"),
    ]


def test_k_shortest_paths_invalid(triangle):
    """Equal endpoints, unknown nodes and k < 1 are errors."""
    with pytest.raises(ValueError):
        k_shortest_paths(triangle, "A", "A", 1)
    with pytest.raises(UnknownEntityError):
        k_shortest_paths(triangle, "A", "Z", 1)
    with pytest.raises(ValueError, match="positive"):
        k_shortest_paths(triangle, "A", "C", 0)


def test_k_shortest_paths_disconnected():
    """A disconnected pair has no paths."""
    topology = make_topology(
        ["A", "B", "C"], [("AB", "A", "B", 10.0), ("BC", "B", "C", 10.0)]
    )
    paths = k_shortest_paths(topology, "A", "C", 2, excluded_links={"AB"})
    assert paths == []


def test_shortest_disjoint_pair_triangle(triangle):
    """Tests the function shortest_disjoint_pair on the triangle."""
    pair = shortest_disjoint_pair(triangle, "A", "C")
    assert pair is not None
    assert [path.nodes for path in pair] == [("A", "B", "C"), ("A", "C")]
    assert sum(path.weight for path in pair) == 1700.0


def test_shortest_disjoint_pair_absent(path_graph):
    """A path graph has no disjoint pair."""
    assert shortest_disjoint_pair(path_graph, "A", "C") is None


def test_shortest_disjoint_pair_node_disjoint(square):
    """Both sides of a ring form a node-disjoint pair."""
    pair = shortest_disjoint_pair(square, "A", "C", Disjointness.NODE)
    assert pair is not None
    assert [path.nodes for path in pair] == [
        ("A", "B", "C"),
        ("A", "D", "C"),
    ]


def test_shortest_disjoint_pair_needs_a_detour():
    """The greedy shortest path is not part of the best pair."""
    # The trap: A-B-C-D is shortest, but blocks both disjoint pairs.
    topology = make_topology(
        ["A", "B", "C", "D"],
        [
            ("AB", "A", "B", 1.0),
            ("BC", "B", "C", 1.0),
            ("CD", "C", "D", 1.0),
            ("AC", "A", "C", 3.0),
            ("BD", "B", "D", 3.0),
        ],
    )
    pair = shortest_disjoint_pair(topology, "A", "D")
    assert pair is not None
    first, second = pair
    assert not set(first.links) & set(second.links)
    assert first.weight + second.weight == 8.0


def test_restoration_paths(triangle, path_graph):
    """Tests the function restoration_paths."""
    paths = restoration_paths(triangle, "A", "C", "AC", 1)
    assert [path.nodes for path in paths] == [("A", "B", "C")]
    assert restoration_paths(path_graph, "A", "C", "BC", 2) == []
    with pytest.raises(UnknownEntityError):
        restoration_paths(triangle, "A", "C", "XY", 1)


def test_path_rank(triangle):
    """The rank of a path in the k-shortest order."""
    shortest, direct = k_shortest_paths(triangle, "A", "C", 2)
    assert path_rank(triangle, shortest) == 1
    assert path_rank(triangle, direct) == 2


def test_k_shortest_edge_paths():
    """Parallel edges are distinct paths, ordered by hops."""
    G = networkx.MultiGraph()
    G.add_edge("A", "C", key="x", length_km=900.0)
    G.add_edge("A", "C", key="w", length_km=800.0)
    G.add_edge("A", "B", key="y", length_km=400.0)
    G.add_edge("B", "C", key="z", length_km=400.0)
    paths = k_shortest_edge_paths(G, "A", "C", 3)
    assert [path.keys for path in paths] == [("w",), ("x",), ("y", "z")]
    assert paths[2].hops == 2
    assert k_shortest_edge_paths(G, "A", "Q", 3) == []
    assert k_shortest_edge_paths(G, "A", "A", 3) == []


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(200))
def test_k_shortest_paths_matches_enumeration(seed):
    """The k lightest paths equal the head of the brute force order."""
    topology = _random_topology(seed)
    for src, dst in itertools.combinations(topology.node_ids, 2):
        expected = _all_simple_paths(topology, src, dst)[:4]
        assert k_shortest_paths(topology, src, dst, 4) == expected


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(200))
@pytest.mark.parametrize("disjointness", list(Disjointness))
def test_shortest_disjoint_pair_is_optimal(seed, disjointness):
    """The pair weight equals the brute force optimum."""
    topology = _random_topology(seed)
    for src, dst in itertools.combinations(topology.node_ids, 2):
        best = _best_disjoint_weight(topology, src, dst, disjointness)
        pair = shortest_disjoint_pair(topology, src, dst, disjointness)
        if best is None:
            assert pair is None
            continue
        assert pair is not None
        first, second = pair
        assert not set(first.links) & set(second.links)
        if disjointness == Disjointness.NODE:
            assert not set(first.nodes[1:-1]) & set(second.nodes[1:-1])
        assert first.weight + second.weight == pytest.approx(best)
