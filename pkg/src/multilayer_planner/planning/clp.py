"""This file contains the construction of the candidate
lightpath (CLP) graph: for every node pair a set of distinct
fiber routes (k shortest, the shortest disjoint pair and,
optionally, one restoration route per single-link failure),
each validated against the transponder catalog. Routes no
mode can close on are removed.
"""

from multiprocessing import Pool

import networkx

from multilayer_planner.graphs.graph_conversions import (
    clp_graph_to_networkx,
    link_weight,
)
from multilayer_planner.graphs.paths import (
    FiberPath,
    k_shortest_paths,
    path_rank,
    restoration_paths,
    shortest_disjoint_pair,
)
from multilayer_planner.ingest.catalog import Catalog
from multilayer_planner.model.exceptions import UnknownEntityError
from multilayer_planner.model.types import (
    CandidateLightpath,
    FeasibleMode,
    FiberGraph,
    FrozenModel,
    RouteKind,
    RouteKindTag,
)
from multilayer_planner.optical.impairment import evaluate_mode, filter_modes


class PairReach(FrozenModel):
    """Transparent reachability of one node pair."""

    endpoints: tuple[str, str]
    shortest_feasible: bool
    protected_feasible: bool


class ClpGraph(FrozenModel):
    """The candidate lightpath graph.

    Attributes:
        nodes (tuple[str, ...]): All node ids, in topology order.
        edges (tuple[CandidateLightpath, ...]): Candidates, by
            node pair and then route order.
        diagnostics (tuple[str, ...]): One line per node pair
            without any feasible candidate.
        reach (tuple[PairReach, ...]): Per node pair, whether the
            shortest route and the shortest disjoint pair close.
    """

    nodes: tuple[str, ...] = ()
    edges: tuple[CandidateLightpath, ...] = ()
    diagnostics: tuple[str, ...] = ()
    reach: tuple[PairReach, ...] = ()

    def edge(self, clp_id: str) -> CandidateLightpath:
        """Looks up a candidate by id.

        Raises:
            UnknownEntityError: If there is no such candidate.
        """
        for clp in self.edges:
            if clp.id == clp_id:
                return clp
        raise UnknownEntityError("candidate lightpath", clp_id)

    def between(self, a: str, b: str) -> list[CandidateLightpath]:
        """Candidates joining a and b, in either orientation."""
        return [clp for clp in self.edges if set(clp.endpoints) == {a, b}]

    def to_networkx(self) -> networkx.MultiGraph:
        """The graph as a networkx.MultiGraph keyed by candidate id."""
        return clp_graph_to_networkx(self.nodes, self.edges)


class _RouteEntry:
    """Mutable accumulator of the kinds found for one route."""

    def __init__(self, path: FiberPath):
        self.path = path
        self.kinds: list[RouteKind] = []

    def add(self, kind: RouteKind) -> None:
        if kind not in self.kinds:
            self.kinds.append(kind)


def _pair_candidates(
    job: tuple[FiberGraph, Catalog, str, str]
) -> tuple[list[CandidateLightpath], PairReach]:
    """Enumerates and validates the candidates of one node pair.

    Top level so that it can be sent to a worker process.
    """
    topology, catalog, a, b = job
    params = catalog.planner_params
    entries: dict[tuple[str, ...], _RouteEntry] = {}

    def add(path: FiberPath, kind: RouteKind) -> None:
        entries.setdefault(path.nodes, _RouteEntry(path)).add(kind)

    shortest = k_shortest_paths(
        topology, a, b, params.k_paths, params.admin_weight
    )
    for rank, path in enumerate(shortest, start=1):
        add(path, RouteKind.kth_shortest(rank))

    # Every fiber link must stay available as a one-hop candidate.
    for link in topology.links:
        if set(link.endpoints) != {a, b}:
            continue
        direct = FiberPath(
            links=(link.id,),
            nodes=(a, b),
            weight=link_weight(link, params.admin_weight),
        )
        if direct.nodes not in entries:
            rank = path_rank(topology, direct, params.admin_weight)
            add(direct, RouteKind.kth_shortest(rank))

    pair = shortest_disjoint_pair(
        topology, a, b, params.disjointness, params.admin_weight
    )
    if pair is not None:
        for path in pair:
            add(path, RouteKind.protection_member())

    if params.enable_restoration_precompute:
        primaries = [entry.path for entry in list(entries.values())]
        for primary in primaries:
            for failed in primary.links:
                backup = restoration_paths(
                    topology, a, b, failed, 1, params.admin_weight
                )
                if backup:
                    add(backup[0], RouteKind.restoration(failed))

    ordered = sorted(entries.values(), key=lambda entry: entry.path.sort_key)
    ids = {
        entry.path.nodes: f"clp-{a}-{b}-{index}"
        for index, entry in enumerate(ordered, start=1)
    }
    partner_of: dict[tuple[str, ...], str] = {}
    if pair is not None:
        partner_of[pair[0].nodes] = ids[pair[1].nodes]
        partner_of[pair[1].nodes] = ids[pair[0].nodes]

    candidates = []
    for entry in ordered:
        candidates.append(
            CandidateLightpath(
                id=ids[entry.path.nodes],
                endpoints=(a, b),
                nodes=entry.path.nodes,
                route=entry.path.links,
                length_km=sum(
                    topology.link(link_id).length_km
                    for link_id in entry.path.links
                ),
                kinds=tuple(entry.kinds),
                feasible_modes=tuple(
                    filter_modes(entry.path, topology, catalog)
                ),
                partner_id=partner_of.get(entry.path.nodes),
            )
        )

    by_nodes = {clp.nodes: clp for clp in candidates}
    reach = PairReach(
        endpoints=(a, b),
        shortest_feasible=bool(
            shortest and by_nodes[shortest[0].nodes].feasible_modes
        ),
        protected_feasible=pair is not None
        and all(by_nodes[path.nodes].feasible_modes for path in pair),
    )
    return candidates, reach


def _keep_feasible(
    clp: CandidateLightpath, catalog: Catalog | None
) -> tuple[FeasibleMode, ...]:
    if catalog is None:
        return clp.feasible_modes
    usable = {mode.id: mode for mode in catalog.usable_modes}
    kept = []
    for feasible in clp.feasible_modes:
        mode = usable.get(feasible.mode_id)
        if mode is None:
            continue
        verdict = evaluate_mode(feasible.metrics, mode, catalog.margins)
        if verdict.feasible:
            kept.append(
                FeasibleMode(mode_id=mode.id, metrics=verdict.metrics)
            )
    return tuple(kept)


def remove_infeasible(
    clp: ClpGraph, catalog: Catalog | None = None
) -> ClpGraph:
    """Removes the candidates no transponder mode closes on.

    When a catalog is given, stored feasible modes are checked
    again against its modes and margins first. A protection
    pair member whose partner is removed loses its partner and
    its protection tag, and is removed too when that was its
    only reason to exist.

    Args:
        clp (ClpGraph): The graph.
        catalog (Catalog | None): Catalog to re-check against.
            Defaults to None (keep stored verdicts).

    Returns:
        ClpGraph: The graph with feasible candidates only.
    """
    rechecked = [
        clp_edge.model_copy(
            update={"feasible_modes": _keep_feasible(clp_edge, catalog)}
        )
        for clp_edge in clp.edges
    ]
    alive = {edge.id for edge in rechecked if edge.feasible_modes}
    edges = []
    for edge in rechecked:
        if edge.id not in alive:
            continue
        if edge.partner_id is not None and edge.partner_id not in alive:
            kinds = tuple(
                kind
                for kind in edge.kinds
                if kind.tag != RouteKindTag.DISJOINT_PROTECTION_PAIR_MEMBER
            )
            if not kinds:
                continue
            edge = edge.model_copy(update={"partner_id": None, "kinds": kinds})
        edges.append(edge)
    return clp.model_copy(update={"edges": tuple(edges)})


def build_clp_graph(
    topology: FiberGraph, catalog: Catalog, workers: int | None = None
) -> ClpGraph:
    """Builds the feasible candidate lightpath graph.

    Args:
        topology (FiberGraph): A validated fiber graph.
        catalog (Catalog): Modes, margins and planner parameters.
        workers (int | None): Worker processes evaluating node
            pairs. Defaults to planner_params.workers.

    Returns:
        ClpGraph: One edge per distinct feasible route and node
            pair, endpoints in topology node order.
    """
    workers = workers or catalog.planner_params.workers
    node_ids = topology.node_ids
    jobs = [
        (topology, catalog, node_ids[i], node_ids[j])
        for i in range(len(node_ids))
        for j in range(i + 1, len(node_ids))
    ]
    if workers > 1 and len(jobs) > 1:
        with Pool(processes=workers) as pool:
            results = pool.map(_pair_candidates, jobs)
    else:
        results = [_pair_candidates(job) for job in jobs]

    edges = [edge for candidates, _ in results for edge in candidates]
    diagnostics = [
        f"pair {a}–{b}: no feasible candidate lightpath"
        for (_, _, a, b), (candidates, _) in zip(jobs, results)
        if not any(edge.feasible_modes for edge in candidates)
    ]
    raw = ClpGraph(
        nodes=tuple(node_ids),
        edges=tuple(edges),
        diagnostics=tuple(diagnostics),
        reach=tuple(reach for _, reach in results),
    )
    return remove_infeasible(raw)
