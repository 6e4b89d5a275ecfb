"""This file contains the virtual topology design: the
potential grooming load of every candidate lightpath, and the
threshold heuristic that keeps candidates carrying enough load
as grooming links and deletes the rest.

Candidates are peeled one deletion unit at a time, weakest
load/capacity ratio first, until the weakest remaining unit
clears the threshold. The deletion order depends only on the
surviving candidates, so raising the threshold can only
lengthen the deletion sequence.
"""

import logging
import math
from collections import defaultdict
from collections.abc import Iterable, Sequence
from pathlib import Path

import networkx

from multilayer_planner.graphs.paths import EdgePath, k_shortest_edge_paths
from multilayer_planner.ingest.catalog import Catalog
from multilayer_planner.logger import LoggerMixin
from multilayer_planner.model.types import (
    CandidateLightpath,
    Demand,
    FrozenModel,
    TransponderMode,
    VirtualLink,
)
from multilayer_planner.planning.clp import ClpGraph

RATIO_TOLERANCE = 1e-9

DELETED = "deleted"
SELECTED = "selected"
ONE_HOP = "one_hop"


class GroomingLoadTable(FrozenModel):
    """Potential grooming load per candidate lightpath id.

    Attributes:
        loads (dict[str, float]): Load, Gbps, for exactly the
            candidates of the graph it was computed on.
        unrouted (tuple[str, ...]): Demands with no path in the
            candidate graph.
    """

    loads: dict[str, float]
    unrouted: tuple[str, ...] = ()

    def load(self, clp_id: str) -> float:
        """Load of one candidate (0 when it carries nothing)."""
        return self.loads.get(clp_id, 0.0)


class GroomingTraceRow(FrozenModel):
    """One decision of the design loop."""

    round: int
    candidate_id: str
    load_gbps: float
    capacity_gbps: float
    decision: str


class GroomingDesign(FrozenModel):
    """Result of the virtual topology design."""

    threshold: float
    links: tuple[VirtualLink, ...]
    loads: GroomingLoadTable
    trace: tuple[GroomingTraceRow, ...] = ()
    rounds: int = 0


def select_mode(
    mode_ids: Iterable[str], catalog: Catalog
) -> TransponderMode:
    """The mode a grooming link runs among feasible ones:
    highest line rate, then lowest cost, then mode id."""
    modes = [catalog.mode(mode_id) for mode_id in mode_ids]
    return min(
        modes,
        key=lambda mode: (-mode.line_rate_gbps, mode.cost_units, mode.id),
    )


def _grooming_paths(
    G: networkx.MultiGraph, demand: Demand, k_grooming: int
) -> list[EdgePath]:
    return k_shortest_edge_paths(G, demand.src, demand.dst, k_grooming)


def _shares(
    paths: Sequence[EdgePath], bitrate_gbps: float, split: bool
) -> dict[str, float]:
    """Load a demand puts on each candidate of its paths."""
    shares: dict[str, float] = defaultdict(float)
    if not paths:
        return shares
    share = bitrate_gbps / len(paths) if split else bitrate_gbps
    for path in paths:
        for key in path.keys:
            shares[key] += share
    return shares


def potential_loads(
    clp: ClpGraph,
    demands: Iterable[Demand],
    k_grooming: int,
    split: bool = True,
) -> GroomingLoadTable:
    """Computes the potential grooming load of every candidate.

    Each demand is routed on its k_grooming shortest paths in
    the candidate graph (1 per candidate, ties by fiber length);
    every candidate of a path accrues the demand bitrate divided
    by the number of paths found (or the full bitrate when split
    is off).

    Args:
        clp (ClpGraph): Feasible candidate graph.
        demands (Iterable[Demand]): The demands.
        k_grooming (int): Grooming paths per demand.
        split (bool): Split bitrate evenly over the paths.
            Defaults to True.

    Returns:
        GroomingLoadTable: Loads covering every candidate.
    """
    G = clp.to_networkx()
    loads = {edge.id: 0.0 for edge in clp.edges}
    contributions: dict[str, list[float]] = defaultdict(list)
    unrouted = []
    for demand in demands:
        paths = _grooming_paths(G, demand, k_grooming)
        if not paths:
            unrouted.append(demand.id)
        for key, share in _shares(
            paths, demand.effective_bitrate_gbps, split
        ).items():
            contributions[key].append(share)
    for key, shares in contributions.items():
        loads[key] = math.fsum(shares)
    return GroomingLoadTable(loads=loads, unrouted=tuple(unrouted))


class _LoadLedger:
    """Grooming loads kept up to date while candidates are
    deleted. Only demands whose paths used a deleted candidate
    are rerouted."""

    def __init__(
        self,
        clp: ClpGraph,
        demands: Sequence[Demand],
        k_grooming: int,
        split: bool,
    ):
        self.G = clp.to_networkx()
        self.demands = list(demands)
        self.k_grooming = k_grooming
        self.split = split
        self.paths: dict[str, list[EdgePath]] = {}
        self.shares: dict[str, dict[str, float]] = {}
        self.users: dict[str, set[str]] = defaultdict(set)
        for demand in self.demands:
            self._route(demand)

    def _route(self, demand: Demand) -> None:
        for key in self.shares.get(demand.id, {}):
            self.users[key].discard(demand.id)
        paths = _grooming_paths(self.G, demand, self.k_grooming)
        self.paths[demand.id] = paths
        self.shares[demand.id] = _shares(
            paths, demand.effective_bitrate_gbps, self.split
        )
        for key in self.shares[demand.id]:
            self.users[key].add(demand.id)

    def load(self, clp_id: str) -> float:
        return math.fsum(
            self.shares[demand_id][clp_id]
            for demand_id in sorted(self.users.get(clp_id, ()))
        )

    def delete(self, candidates: Iterable[CandidateLightpath]) -> None:
        affected: set[str] = set()
        for clp in candidates:
            self.G.remove_edge(*clp.endpoints, key=clp.id)
            affected |= self.users.pop(clp.id, set())
        for demand in self.demands:
            if demand.id in affected:
                self._route(demand)

    def table(self, candidate_ids: Iterable[str]) -> GroomingLoadTable:
        return GroomingLoadTable(
            loads={clp_id: self.load(clp_id) for clp_id in candidate_ids},
            unrouted=tuple(
                demand.id
                for demand in self.demands
                if not self.paths[demand.id]
            ),
        )

    def protected_traversals(self) -> set[str]:
        """Candidates on the paths of protection-class demands."""
        return {
            key
            for demand in self.demands
            if demand.protection.needs_protection
            for path in self.paths[demand.id]
            for key in path.keys
        }


def _deletion_units(
    survivors: dict[str, CandidateLightpath], protected: set[str]
) -> list[tuple[str, ...]]:
    """Groups surviving multi-hop candidates into deletion
    units. Protection pairs on protected demands' paths form a
    unit; a unit with a one-hop member is never deleted."""
    units: list[tuple[str, ...]] = []
    seen: set[str] = set()
    for clp_id in sorted(survivors):
        if clp_id in seen:
            continue
        clp = survivors[clp_id]
        partner = survivors.get(clp.partner_id or "")
        if partner is not None and {clp.id, partner.id} & protected:
            members: tuple[CandidateLightpath, ...] = (clp, partner)
        else:
            members = (clp,)
        seen.update(member.id for member in members)
        if any(member.is_one_hop for member in members):
            continue
        units.append(tuple(sorted(member.id for member in members)))
    return units


def groom(
    clp: ClpGraph,
    demands: Sequence[Demand],
    catalog: Catalog,
    threshold: float | None = None,
) -> GroomingDesign:
    """Designs the virtual topology.

    Each round computes the loads on the surviving candidates
    and takes the deletion unit with the lowest load/capacity
    ratio (ties by member id); a unit's ratio is the best ratio
    of its members. If that ratio is below the threshold the
    unit is deleted and another round starts, so a round
    deletes one unit (one candidate, or a protection pair)
    even when several are below the threshold. In single-pass
    mode loads are computed once and every unit below the
    threshold is deleted. One-hop candidates are never deleted.

    Args:
        clp (ClpGraph): Feasible candidate graph.
        demands (Sequence[Demand]): The demands.
        catalog (Catalog): Modes and planner parameters.
        threshold (float | None): Grooming threshold overriding
            planner_params.grooming_threshold. Defaults to None.

    Returns:
        GroomingDesign: Virtual links (no lightpaths yet), final
            loads and the per-round trace.

    Raises:
        ValueError: If the threshold is outside (0, 1].
    """
    params = catalog.planner_params
    threshold = params.grooming_threshold if threshold is None else threshold
    if not 0 < threshold <= 1:
        raise ValueError(f"threshold out of range (0, 1]: {threshold}")

    survivors = {edge.id: edge for edge in clp.edges}
    capacity = {
        edge.id: select_mode(edge.mode_ids, catalog).line_rate_gbps
        for edge in clp.edges
    }
    ledger = _LoadLedger(clp, demands, params.k_grooming, params.load_split)
    trace: list[GroomingTraceRow] = []

    def ratio(unit: tuple[str, ...]) -> float:
        return max(ledger.load(i) / capacity[i] for i in unit)

    def record(round_index: int, clp_id: str, decision: str) -> None:
        trace.append(
            GroomingTraceRow(
                round=round_index,
                candidate_id=clp_id,
                load_gbps=ledger.load(clp_id),
                capacity_gbps=capacity[clp_id],
                decision=decision,
            )
        )

    rounds = 0
    while True:
        rounds += 1
        units = _deletion_units(survivors, ledger.protected_traversals())
        scored = sorted((ratio(unit), unit) for unit in units)
        failing = [
            item for item in scored if item[0] < threshold - RATIO_TOLERANCE
        ]
        if not failing:
            break
        doomed = failing if params.single_pass else failing[:1]
        deleted = [survivors[i] for _, unit in doomed for i in unit]
        for edge in deleted:
            record(rounds, edge.id, DELETED)
            del survivors[edge.id]
        ledger.delete(deleted)
        if params.single_pass:
            break

    for clp_id in sorted(survivors):
        record(
            rounds,
            clp_id,
            ONE_HOP if survivors[clp_id].is_one_hop else SELECTED,
        )

    protected = ledger.protected_traversals()
    links = []
    for edge in clp.edges:
        if edge.id not in survivors:
            continue
        partner = survivors.get(edge.partner_id or "")
        links.append(
            make_virtual_link(
                edge,
                catalog,
                partner if edge.id in protected else None,
            )
        )
    return GroomingDesign(
        threshold=threshold,
        links=tuple(links),
        loads=ledger.table(sorted(survivors)),
        trace=tuple(trace),
        rounds=rounds,
    )


def virtual_link_id(clp_id: str) -> str:
    """Id of the virtual link selected from a candidate."""
    return "vl-" + clp_id.removeprefix("clp-")


def make_virtual_link(
    clp: CandidateLightpath,
    catalog: Catalog,
    partner: CandidateLightpath | None = None,
) -> VirtualLink:
    """Turns a candidate into an empty virtual link.

    With a partner, the link is 1+1 protected over the partner
    route and runs the best mode closing on both routes; it
    stays unprotected when no mode closes on both.

    Args:
        clp (CandidateLightpath): The selected candidate.
        catalog (Catalog): Transponder modes.
        partner (CandidateLightpath | None): Disjoint partner to
            protect over. Defaults to None.

    Returns:
        VirtualLink: Link without lightpaths.
    """
    mode = select_mode(clp.mode_ids, catalog)
    protected = False
    if partner is not None:
        common = [i for i in clp.mode_ids if i in set(partner.mode_ids)]
        if common:
            mode = select_mode(common, catalog)
            protected = True
    return VirtualLink(
        id=virtual_link_id(clp.id),
        clp_id=clp.id,
        endpoints=clp.endpoints,
        selected_mode=mode.id,
        line_rate_gbps=mode.line_rate_gbps,
        length_km=clp.length_km,
        one_hop=clp.is_one_hop,
        protected=protected,
    )


def design_virtual_topology(
    clp: ClpGraph, demands: Sequence[Demand], catalog: Catalog
) -> list[VirtualLink]:
    """Selects the grooming links; see `groom`."""
    return list(groom(clp, demands, catalog).links)


class VirtualTopologyDesigner(LoggerMixin):
    """Runs the grooming heuristic and logs its decisions."""

    def __init__(
        self,
        catalog: Catalog,
        logger_filename: str | Path | None = None,
        logger_level: int = logging.INFO,
    ):
        super().__init__(
            logger_filename=logger_filename, logger_level=logger_level
        )
        self.catalog = catalog

    def design(
        self,
        clp: ClpGraph,
        demands: Sequence[Demand],
        threshold: float | None = None,
    ) -> GroomingDesign:
        """Designs the virtual topology and logs the trace.

        Args:
            clp (ClpGraph): Feasible candidate graph.
            demands (Sequence[Demand]): The demands.
            threshold (float | None): Threshold override.
                Defaults to None.

        Returns:
            GroomingDesign: See `groom`.
        """
        result = groom(clp, demands, self.catalog, threshold)
        for row in result.trace:
            self.logger.debug(
                "round %d: %s load %.3f/%.3f Gbps %s",
                row.round,
                row.candidate_id,
                row.load_gbps,
                row.capacity_gbps,
                row.decision,
            )
        for demand_id in result.loads.unrouted:
            self.logger.warning("demand %s has no grooming path", demand_id)
        bypass = sum(1 for link in result.links if not link.one_hop)
        self.logger.info(
            "threshold %.2f: %d virtual links (%d bypass) after %d rounds",
            result.threshold,
            len(result.links),
            bypass,
            result.rounds,
        )
        return result
