"""This file contains demand routing and capacity allocation
over the virtual topology, and the installation of lightpaths
(with their spectrum) whenever a grooming link runs out of
capacity.

The same allocation state backs the batch planner and the
provisioning service.
"""

import logging
from collections.abc import Iterable, Sequence
from pathlib import Path

import networkx

from multilayer_planner.graphs.graph_conversions import (
    virtual_topology_to_networkx,
)
from multilayer_planner.graphs.paths import k_shortest_edge_paths
from multilayer_planner.ingest.catalog import Catalog, DemandOrder
from multilayer_planner.logger import LoggerMixin
from multilayer_planner.model.exceptions import (
    SpectrumExhaustedError,
    UnknownEntityError,
)
from multilayer_planner.model.types import (
    Demand,
    FiberGraph,
    FrozenModel,
    Lightpath,
    RestorationGap,
    RouteKindTag,
    UnservedDemand,
    VirtualLink,
)
from multilayer_planner.optical.spectrum import SpectrumState, assign_spectrum
from multilayer_planner.planning.clp import ClpGraph

CAPACITY_TOLERANCE = 1e-9

NO_VIRTUAL_PATH = "no virtual path"
SPECTRUM_EXHAUSTED = "spectrum exhausted"
EXPLICIT_ROUTE_UNMAPPABLE = "explicit route unmappable"
NO_PROTECTED_PATH = "no protected path"


class DemandAllocation(FrozenModel):
    """Outcome of allocating one demand.

    Attributes:
        demand_id (str): The demand.
        route (tuple[str, ...]): Virtual link ids, empty when the
            demand was not placed.
        installed (tuple[str, ...]): Ids of the lightpaths
            installed while placing it.
        reason (str | None): Why the demand was not placed.
    """

    demand_id: str
    route: tuple[str, ...] = ()
    installed: tuple[str, ...] = ()
    reason: str | None = None

    @property
    def served(self) -> bool:
        """Whether the demand was placed."""
        return self.reason is None


class AllocationState:
    """Running allocation: virtual links with their lightpaths
    and allocated capacity, the spectrum ledger and the
    served/unserved demands."""

    def __init__(
        self,
        topology: FiberGraph,
        clp: ClpGraph,
        links: Iterable[VirtualLink],
        catalog: Catalog,
        spectrum: SpectrumState | None = None,
    ):
        params = catalog.planner_params
        self.topology = topology
        self.clp = clp
        self.catalog = catalog
        self.spectrum = spectrum or SpectrumState(
            catalog.grid,
            topology,
            enable_overbuild=params.enable_overbuild,
            policy=params.spectrum_policy,
        )
        self.links: dict[str, VirtualLink] = {link.id: link for link in links}
        self.lightpaths: dict[str, Lightpath] = {}
        self.demand_routes: dict[str, tuple[str, ...]] = {}
        self.demand_gbps: dict[str, float] = {}
        self.unserved: dict[str, UnservedDemand] = {}
        self.restoration_gaps: list[RestorationGap] = []
        self._next_lightpath = 0
        for link in self.links.values():
            for lightpath in link.lightpaths:
                self.lightpaths[lightpath.id] = lightpath
                suffix = lightpath.id.removeprefix("lp-")
                if suffix.isdigit():
                    self._next_lightpath = max(
                        self._next_lightpath, int(suffix)
                    )
                if spectrum is None:
                    self._mark(lightpath)

    def _mark(self, lightpath: Lightpath) -> None:
        for assignment in (lightpath.spectrum, lightpath.protection_spectrum):
            if assignment is None:
                continue
            for item in assignment.fiber_instances:
                self.spectrum.ensure_fiber_count(
                    item.link_id, item.instance + 1
                )
            self.spectrum.mark(assignment)

    def link(self, link_id: str) -> VirtualLink:
        """Looks up a virtual link.

        Raises:
            UnknownEntityError: If there is no such link.
        """
        try:
            return self.links[link_id]
        except KeyError as err:
            raise UnknownEntityError("virtual link", link_id) from err

    def graph(self, protected_only: bool = False) -> networkx.MultiGraph:
        """The virtual topology as a networkx.MultiGraph."""
        return virtual_topology_to_networkx(
            self.clp.nodes,
            (
                link
                for link in self.links.values()
                if link.protected or not protected_only
            ),
        )

    def new_lightpath_id(self) -> str:
        """Next free lightpath id."""
        self._next_lightpath += 1
        return f"lp-{self._next_lightpath}"


def order_demands(
    demands: Iterable[Demand], order: DemandOrder
) -> list[Demand]:
    """Sorts demands for allocation.

    Args:
        demands (Iterable[Demand]): The demands.
        order (DemandOrder): Descending or ascending effective
            bitrate (ties by id), or input order.

    Returns:
        list[Demand]: Demands in allocation order.
    """
    if order == DemandOrder.DESC:
        return sorted(
            demands, key=lambda d: (-d.effective_bitrate_gbps, d.id)
        )
    if order == DemandOrder.ASC:
        return sorted(demands, key=lambda d: (d.effective_bitrate_gbps, d.id))
    return list(demands)


def install_lightpath(state: AllocationState, link_id: str) -> Lightpath:
    """Installs one more lightpath on a virtual link.

    Spectrum is assigned on the link's fiber route and, for a
    protected link, also on its partner's route.

    Args:
        state (AllocationState): The state (mutated).
        link_id (str): The virtual link.

    Returns:
        Lightpath: The installed lightpath.

    Raises:
        SpectrumExhaustedError: If spectrum cannot be found under
            the overbuild policy; nothing is installed then.
    """
    link = state.link(link_id)
    clp = state.clp.edge(link.clp_id)
    width = state.catalog.grid.width_for(
        state.catalog.mode(link.selected_mode)
    )
    working = assign_spectrum(state.spectrum, state.topology, clp.route, width)
    protection = None
    if link.protected:
        assert clp.partner_id is not None
        partner = state.clp.edge(clp.partner_id)
        try:
            protection = assign_spectrum(
                state.spectrum, state.topology, partner.route, width
            )
        except SpectrumExhaustedError:
            state.spectrum.release(working)
            raise
    lightpath = Lightpath(
        id=state.new_lightpath_id(),
        virtual_link_id=link.id,
        mode_id=link.selected_mode,
        spectrum=working,
        protection_spectrum=protection,
    )
    state.links[link.id] = link.model_copy(
        update={"lightpaths": link.lightpaths + (lightpath,)}
    )
    state.lightpaths[lightpath.id] = lightpath
    return lightpath


def remove_lightpath(state: AllocationState, lightpath_id: str) -> None:
    """Uninstalls a lightpath and frees its spectrum.

    Raises:
        ValueError: If removing it would leave the link with less
            capacity than allocated.
    """
    lightpath = state.lightpaths[lightpath_id]
    link = state.link(lightpath.virtual_link_id)
    remaining = tuple(lp for lp in link.lightpaths if lp.id != lightpath_id)
    if (
        len(remaining) * link.line_rate_gbps
        < link.allocated_gbps - CAPACITY_TOLERANCE
    ):
        raise ValueError(f"{lightpath_id} carries allocated capacity.")
    state.spectrum.release(lightpath.spectrum)
    if lightpath.protection_spectrum is not None:
        state.spectrum.release(lightpath.protection_spectrum)
    state.links[link.id] = link.model_copy(update={"lightpaths": remaining})
    del state.lightpaths[lightpath_id]


def _map_explicit_route(
    state: AllocationState, route: Sequence[str], protected_only: bool
) -> tuple[str, ...] | None:
    """Virtual links whose fiber node sequences concatenate to
    the explicit route; fewest links first, then shortest."""
    links = [
        link
        for link in state.links.values()
        if link.protected or not protected_only
    ]
    best: dict[int, tuple[int, float, tuple[str, ...]]] = {0: (0, 0.0, ())}
    for start in range(len(route) - 1):
        if start not in best:
            continue
        hops, length, chosen = best[start]
        for link in sorted(links, key=lambda link: link.id):
            nodes = state.clp.edge(link.clp_id).nodes
            for oriented in (nodes, nodes[::-1]):
                stop = start + len(oriented) - 1
                if tuple(route[start : stop + 1]) != oriented:
                    continue
                candidate = (
                    hops + 1,
                    round(length + link.length_km, 6),
                    chosen + (link.id,),
                )
                if stop not in best or candidate < best[stop]:
                    best[stop] = candidate
    last = best.get(len(route) - 1)
    return last[2] if last is not None and last[2] else None


def find_route(
    state: AllocationState, demand: Demand
) -> tuple[tuple[str, ...], None] | tuple[None, str]:
    """Chooses the virtual links a demand is routed on.

    The route is the fewest-hop virtual path (ties by fiber
    length, then node and link ids), restricted to protected
    links for protection-class demands. An explicit route is
    mapped onto virtual links instead.

    Returns:
        tuple: (virtual link ids, None) or (None, reason).
    """
    protected_only = demand.protection.needs_protection
    if demand.explicit_route is not None:
        mapped = _map_explicit_route(
            state, demand.explicit_route, protected_only
        )
        if mapped is None:
            return None, EXPLICIT_ROUTE_UNMAPPABLE
        return mapped, None
    paths = k_shortest_edge_paths(
        state.graph(protected_only), demand.src, demand.dst, 1
    )
    if paths:
        return paths[0].keys, None
    if protected_only and k_shortest_edge_paths(
        state.graph(), demand.src, demand.dst, 1
    ):
        return None, NO_PROTECTED_PATH
    return None, NO_VIRTUAL_PATH


def _restoration_gaps(
    state: AllocationState, demand: Demand, route: Sequence[str]
) -> list[RestorationGap]:
    """Failures on the route's fiber links without a precomputed
    feasible restoration candidate."""
    gaps = []
    for link_id in route:
        link = state.link(link_id)
        clp = state.clp.edge(link.clp_id)
        covered = {
            kind.failed_link_id
            for other in state.clp.between(*link.endpoints)
            for kind in other.kinds
            if kind.tag == RouteKindTag.RESTORATION
        }
        gaps.extend(
            RestorationGap(
                demand_id=demand.id,
                virtual_link_id=link.id,
                failed_link_id=failed,
            )
            for failed in clp.route
            if failed not in covered
        )
    return gaps


def allocate_demand(
    state: AllocationState, demand: Demand, keep_partial: bool = True
) -> DemandAllocation:
    """Routes one demand and allocates its bitrate.

    Lightpaths are installed on every route link whose residual
    capacity is too small. A demand is never split.

    Args:
        state (AllocationState): The state (mutated).
        demand (Demand): The demand.
        keep_partial (bool): Keep lightpaths installed for a
            demand that cannot be placed. Defaults to True.

    Returns:
        DemandAllocation: The route or the reason for failure.
    """
    route, reason = find_route(state, demand)
    if route is None:
        return DemandAllocation(demand_id=demand.id, reason=reason)

    bitrate = demand.effective_bitrate_gbps
    installed: list[str] = []
    for link_id in route:
        while state.link(link_id).residual_gbps < (
            bitrate - CAPACITY_TOLERANCE
        ):
            try:
                installed.append(install_lightpath(state, link_id).id)
            except SpectrumExhaustedError:
                if not keep_partial:
                    for lightpath_id in reversed(installed):
                        remove_lightpath(state, lightpath_id)
                    installed = []
                return DemandAllocation(
                    demand_id=demand.id,
                    installed=tuple(installed),
                    reason=SPECTRUM_EXHAUSTED,
                )

    for link_id in route:
        link = state.link(link_id)
        state.links[link_id] = link.model_copy(
            update={"allocated_gbps": link.allocated_gbps + bitrate}
        )
    state.demand_routes[demand.id] = route
    state.demand_gbps[demand.id] = bitrate
    if demand.protection.needs_restoration:
        state.restoration_gaps.extend(
            _restoration_gaps(state, demand, route)
        )
    return DemandAllocation(
        demand_id=demand.id, route=route, installed=tuple(installed)
    )


def release_demand(state: AllocationState, demand_id: str) -> list[str]:
    """Releases the capacity of a served demand.

    Trailing lightpaths of each route link are removed while
    the remaining ones still cover the link's allocation.

    Args:
        state (AllocationState): The state (mutated).
        demand_id (str): A served demand.

    Returns:
        list[str]: Ids of the removed lightpaths.

    Raises:
        UnknownEntityError: If the demand is not served.
    """
    if demand_id not in state.demand_routes:
        raise UnknownEntityError("demand", demand_id)
    route = state.demand_routes.pop(demand_id)
    bitrate = state.demand_gbps.pop(demand_id)
    state.restoration_gaps = [
        gap for gap in state.restoration_gaps if gap.demand_id != demand_id
    ]
    removed = []
    for link_id in route:
        link = state.link(link_id)
        allocated = max(link.allocated_gbps - bitrate, 0.0)
        state.links[link_id] = link.model_copy(
            update={"allocated_gbps": allocated}
        )
        while state.links[link_id].lightpaths:
            link = state.links[link_id]
            spare = link.capacity_gbps - link.line_rate_gbps
            if spare < link.allocated_gbps - CAPACITY_TOLERANCE:
                break
            removed.append(link.lightpaths[-1].id)
            remove_lightpath(state, link.lightpaths[-1].id)
    return removed


def record_allocation(
    state: AllocationState, allocation: DemandAllocation
) -> None:
    """Books a failed allocation as an unserved demand."""
    if allocation.reason is not None:
        state.unserved[allocation.demand_id] = UnservedDemand(
            demand_id=allocation.demand_id, reason=allocation.reason
        )


def route_demands(
    state: AllocationState, demands: Iterable[Demand]
) -> AllocationState:
    """Allocates every demand in the catalog's demand order.

    Args:
        state (AllocationState): Fresh state over the designed
            virtual topology (mutated).
        demands (Iterable[Demand]): The demands.

    Returns:
        AllocationState: The same state, completed.
    """
    order = state.catalog.planner_params.demand_order
    for demand in order_demands(demands, order):
        record_allocation(state, allocate_demand(state, demand))
    return state


class CapacityAllocator(LoggerMixin):
    """Allocates demands on a virtual topology and logs each
    decision."""

    def __init__(
        self,
        state: AllocationState,
        logger_filename: str | Path | None = None,
        logger_level: int = logging.INFO,
    ):
        super().__init__(
            logger_filename=logger_filename, logger_level=logger_level
        )
        self.state = state

    def allocate(self, demands: Iterable[Demand]) -> AllocationState:
        """Allocates every demand; see `route_demands`."""
        order = self.state.catalog.planner_params.demand_order
        for demand in order_demands(demands, order):
            allocation = allocate_demand(self.state, demand)
            record_allocation(self.state, allocation)
            if allocation.served:
                self.logger.debug(
                    "demand %s: %.3f Gbps over %s, %d new lightpaths",
                    demand.id,
                    demand.effective_bitrate_gbps,
                    ",".join(allocation.route),
                    len(allocation.installed),
                )
            else:
                self.logger.warning(
                    "demand %s unserved: %s", demand.id, allocation.reason
                )
        self.logger.info(
            "%d demands served, %d unserved, %d lightpaths",
            len(self.state.demand_routes),
            len(self.state.unserved),
            len(self.state.lightpaths),
        )
        return self.state
