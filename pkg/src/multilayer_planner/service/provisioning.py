"""This file contains the stateful provisioning service: the
candidate lightpaths exposed as abstract links, on-demand path
queries answered with time-limited offers, and provisioning
and release of services against a live spectrum ledger.

Every operation runs under one lock, so concurrent callers see
the operations in some serial order.
"""

import logging
import threading
import time
from collections.abc import Callable, Iterator, Sequence
from contextlib import contextmanager
from enum import Enum
from pathlib import Path

import numpy
from pydantic import Field, PositiveFloat, model_validator

from multilayer_planner.ingest.catalog import Catalog, slots_to_ghz
from multilayer_planner.logger import LoggerMixin
from multilayer_planner.model.exceptions import (
    OfferExpiredError,
    RequestRefusedError,
    UnknownOfferError,
    UnknownRecordError,
)
from multilayer_planner.model.types import (
    CandidateLightpath,
    Demand,
    FiberGraph,
    FrozenModel,
    Lightpath,
    Plan,
    ProtectionClass,
    ServiceType,
    VirtualLink,
)
from multilayer_planner.optical.spectrum import route_feasible_starts
from multilayer_planner.planning.allocate import (
    AllocationState,
    allocate_demand,
    find_route,
    release_demand,
)
from multilayer_planner.planning.clp import ClpGraph, build_clp_graph
from multilayer_planner.planning.grooming import (
    make_virtual_link,
    select_mode,
)

DEFAULT_OFFER_TTL_S = 60.0
OVERSIZE_REASON = "bitrate exceeds single lightpath capacity"
UNKNOWN_NODE_REASON = "unknown node"
PROTECTED_SUFFIX = "+p"


class RecordStatus(str, Enum):
    """Life cycle of a provisioned service."""

    ACTIVE = "active"
    RELEASED = "released"


class AbstractMode(FrozenModel):
    """A transponder mode usable on an abstract link."""

    mode_id: str
    line_rate_gbps: float
    slot_width_ghz: float


class AbstractLink(FrozenModel):
    """A candidate lightpath as advertised to a controller."""

    clp_id: str
    endpoints: tuple[str, str]
    modes: tuple[AbstractMode, ...]
    residual_gbps: float
    length_km: float
    route: tuple[str, ...] | None = None


class PathRequest(FrozenModel):
    """An on-demand path query."""

    src: str
    dst: str
    bitrate_gbps: PositiveFloat
    protection: ProtectionClass = ProtectionClass.UNPROTECTED
    explicit_route: tuple[str, ...] | None = None

    @model_validator(mode="after")
    def _distinct_endpoints(self) -> "PathRequest":
        if self.src == self.dst:
            raise ValueError(f"src equals dst {self.src}")
        return self


class PathOffer(FrozenModel):
    """A routed request holding tentative capacity and spectrum
    until it is provisioned or expires."""

    offer_id: str
    request: PathRequest
    virtual_link_ids: tuple[str, ...]
    clp_ids: tuple[str, ...]
    mode_ids: tuple[str, ...]
    lightpaths: tuple[Lightpath, ...] = ()
    routes: tuple[tuple[str, ...], ...] | None = None
    expires_at: float


class ProvisionRecord(FrozenModel):
    """A provisioned service."""

    record_id: str
    offer_id: str
    request: PathRequest
    virtual_link_ids: tuple[str, ...]
    lightpaths: tuple[Lightpath, ...] = ()
    status: RecordStatus = RecordStatus.ACTIVE


class PendingOffer(FrozenModel):
    """An offer in a snapshot, with its remaining lifetime."""

    offer: PathOffer
    remaining_s: float


class ServiceSnapshot(FrozenModel):
    """Everything needed to restart the service."""

    candidates: tuple[CandidateLightpath, ...]
    virtual_topology: tuple[VirtualLink, ...]
    demand_routes: dict[str, tuple[str, ...]] = Field(default_factory=dict)
    demand_gbps: dict[str, float] = Field(default_factory=dict)
    fiber_instances: dict[str, int] = Field(default_factory=dict)
    records: tuple[ProvisionRecord, ...] = ()
    offers: tuple[PendingOffer, ...] = ()
    expired_offers: tuple[str, ...] = ()
    next_offer: int = 0
    next_record: int = 0


def fresh_virtual_links(
    clp: ClpGraph, catalog: Catalog
) -> list[VirtualLink]:
    """Every candidate as an empty virtual link, plus a 1+1
    protected variant for every candidate with a partner."""
    links = []
    for edge in clp.edges:
        links.append(make_virtual_link(edge, catalog))
        if edge.partner_id is None:
            continue
        protected = make_virtual_link(
            edge, catalog, clp.edge(edge.partner_id)
        )
        if protected.protected:
            links.append(
                protected.model_copy(
                    update={"id": protected.id + PROTECTED_SUFFIX}
                )
            )
    return links


class ProvisioningService(LoggerMixin):
    """Stateful path computation and provisioning.

    Queries route exactly like the batch allocation: a query
    followed by provisioning, demand after demand, gives the
    same lightpaths and spectrum as allocating the demands in
    input order.

    Attributes:
        offer_ttl_s (float): Offer lifetime, seconds.
        expose_routes (bool): Whether fiber routes are shown.
    """

    def __init__(
        self,
        topology: FiberGraph,
        catalog: Catalog,
        clp: ClpGraph | None = None,
        virtual_links: Sequence[VirtualLink] | None = None,
        offer_ttl_s: float = DEFAULT_OFFER_TTL_S,
        expose_routes: bool = False,
        clock: Callable[[], float] = time.monotonic,
        logger_filename: str | Path | None = None,
        logger_level: int = logging.INFO,
    ):
        super().__init__(
            logger_filename=logger_filename, logger_level=logger_level
        )
        self.topology = topology
        self.catalog = catalog
        self.offer_ttl_s = offer_ttl_s
        self.expose_routes = expose_routes
        self.clock = clock
        if clp is None:
            clp = build_clp_graph(topology, catalog)
        if virtual_links is None:
            virtual_links = fresh_virtual_links(clp, catalog)
        self.state = AllocationState(topology, clp, virtual_links, catalog)
        self._lock = threading.RLock()
        self._offers: dict[str, PathOffer] = {}
        self._expired: set[str] = set()
        self._records: dict[str, ProvisionRecord] = {}
        self._record_of_offer: dict[str, str] = {}
        self._next_offer = 0
        self._next_record = 0
        self.logger.info(
            "service up: %d abstract links, %d virtual links",
            len(clp.edges),
            len(self.state.links),
        )

    @classmethod
    def from_plan(
        cls,
        plan: Plan,
        topology: FiberGraph,
        catalog: Catalog,
        **kwargs,
    ) -> "ProvisioningService":
        """Starts the service on a planned network; planned
        demands keep their capacity and lightpaths."""
        clp = ClpGraph(nodes=tuple(topology.node_ids), edges=plan.candidates)
        service = cls(
            topology,
            catalog,
            clp=clp,
            virtual_links=plan.virtual_topology,
            **kwargs,
        )
        for link_id, count in plan.fiber_instances.items():
            service.state.spectrum.ensure_fiber_count(link_id, count)
        return service

    @contextmanager
    def _serialized(self) -> Iterator[None]:
        with self._lock:
            self._expire_offers()
            yield

    def _expire_offers(self) -> None:
        now = self.clock()
        for offer_id in sorted(self._offers):
            if self._offers[offer_id].expires_at <= now:
                release_demand(self.state, offer_id)
                del self._offers[offer_id]
                self._expired.add(offer_id)
                self.logger.info("offer %s expired", offer_id)

    def _abstract_modes(self, clp: CandidateLightpath) -> list[AbstractMode]:
        grid = self.catalog.grid
        modes = []
        for mode_id in clp.mode_ids:
            mode = self.catalog.mode(mode_id)
            modes.append(
                AbstractMode(
                    mode_id=mode.id,
                    line_rate_gbps=mode.line_rate_gbps,
                    slot_width_ghz=slots_to_ghz(grid.width_for(mode), grid),
                )
            )
        return modes

    def _free_windows(self, clp: CandidateLightpath, width: int) -> int:
        """Disjoint windows of `width` cells that could each hold a
        lightpath on the route, every link on a single fiber
        instance."""
        starts = route_feasible_starts(self.state.spectrum, clp.route, width)
        count, next_start = 0, 0
        for start in numpy.flatnonzero(starts):
            if start >= next_start:
                count += 1
                next_start = start + width
        return count

    def get_abstract_topology(self) -> list[AbstractLink]:
        """Advertises every candidate lightpath with its current
        residual capacity.

        The residual is the unallocated capacity of the installed
        lightpaths on the candidate, plus one line rate per free
        spectrum window of the candidate's best mode.

        Returns:
            list[AbstractLink]: One link per candidate.
        """
        with self._serialized():
            links = []
            for clp in self.state.clp.edges:
                on_clp = [
                    link
                    for link in self.state.links.values()
                    if link.clp_id == clp.id
                ]
                mode = (
                    self.catalog.mode(on_clp[0].selected_mode)
                    if on_clp
                    else select_mode(clp.mode_ids, self.catalog)
                )
                width = self.catalog.grid.width_for(mode)
                residual = sum(link.residual_gbps for link in on_clp)
                residual += (
                    self._free_windows(clp, width) * mode.line_rate_gbps
                )
                links.append(
                    AbstractLink(
                        clp_id=clp.id,
                        endpoints=clp.endpoints,
                        modes=tuple(self._abstract_modes(clp)),
                        residual_gbps=residual,
                        length_km=clp.length_km,
                        route=clp.route if self.expose_routes else None,
                    )
                )
            return links

    def query_path(self, request: PathRequest) -> PathOffer:
        """Routes a request and reserves capacity for it.

        Args:
            request (PathRequest): The query.

        Returns:
            PathOffer: The offer, valid for offer_ttl_s.

        Raises:
            RequestRefusedError: When an endpoint is not a node,
                when the bitrate exceeds the line rate of a route
                link (a request is never bonded over several
                lightpaths), or with the allocation reason when the
                request cannot be placed.
        """
        with self._serialized():
            for node_id in (request.src, request.dst):
                if not self.topology.has_node(node_id):
                    raise RequestRefusedError(
                        f"{UNKNOWN_NODE_REASON} {node_id}"
                    )
            if request.bitrate_gbps > self.catalog.max_line_rate_gbps:
                raise RequestRefusedError(OVERSIZE_REASON)
            demand = Demand(
                id=f"offer-{self._next_offer + 1}",
                src=request.src,
                dst=request.dst,
                service_type=ServiceType.ETHERNET,
                bitrate_gbps=request.bitrate_gbps,
                protection=request.protection,
                explicit_route=request.explicit_route,
            )
            route, _ = find_route(self.state, demand)
            if route is not None and any(
                demand.effective_bitrate_gbps
                > self.state.link(link_id).line_rate_gbps
                for link_id in route
            ):
                self.logger.info(
                    "%s refused on %s: %s",
                    request,
                    ",".join(route),
                    OVERSIZE_REASON,
                )
                raise RequestRefusedError(OVERSIZE_REASON)
            self._next_offer += 1
            offer_id = demand.id
            allocation = allocate_demand(
                self.state, demand, keep_partial=False
            )
            if allocation.reason is not None:
                self.logger.info(
                    "%s refused: %s", offer_id, allocation.reason
                )
                raise RequestRefusedError(allocation.reason)
            links = [self.state.link(i) for i in allocation.route]
            clps = [self.state.clp.edge(link.clp_id) for link in links]
            offer = PathOffer(
                offer_id=offer_id,
                request=request,
                virtual_link_ids=allocation.route,
                clp_ids=tuple(clp.id for clp in clps),
                mode_ids=tuple(link.selected_mode for link in links),
                lightpaths=tuple(
                    self.state.lightpaths[i] for i in allocation.installed
                ),
                routes=(
                    tuple(clp.route for clp in clps)
                    if self.expose_routes
                    else None
                ),
                expires_at=self.clock() + self.offer_ttl_s,
            )
            self._offers[offer_id] = offer
            self.logger.info(
                "%s: %s over %s", offer_id, request, ",".join(offer.clp_ids)
            )
            return offer

    def provision(self, offer_id: str) -> ProvisionRecord:
        """Commits an offer. Provisioning the same offer again
        returns the same record.

        Raises:
            OfferExpiredError: If the offer expired.
            UnknownOfferError: If the offer is unknown.
        """
        with self._serialized():
            if offer_id in self._record_of_offer:
                return self._records[self._record_of_offer[offer_id]]
            if offer_id in self._expired:
                raise OfferExpiredError(f"offer expired: {offer_id}")
            if offer_id not in self._offers:
                raise UnknownOfferError(f"unknown offer {offer_id}")
            offer = self._offers.pop(offer_id)
            self._next_record += 1
            record = ProvisionRecord(
                record_id=f"rec-{self._next_record}",
                offer_id=offer_id,
                request=offer.request,
                virtual_link_ids=offer.virtual_link_ids,
                lightpaths=offer.lightpaths,
            )
            self._records[record.record_id] = record
            self._record_of_offer[offer_id] = record.record_id
            self.logger.info(
                "%s provisioned as %s", offer_id, record.record_id
            )
            return record

    def release(self, record_id: str) -> ProvisionRecord:
        """Releases a provisioned service. Releasing it again is
        acknowledged without effect.

        Raises:
            UnknownRecordError: If the record is unknown.
        """
        with self._serialized():
            if record_id not in self._records:
                raise UnknownRecordError(f"unknown record {record_id}")
            record = self._records[record_id]
            if record.status == RecordStatus.RELEASED:
                return record
            removed = release_demand(self.state, record.offer_id)
            record = record.model_copy(
                update={"status": RecordStatus.RELEASED}
            )
            self._records[record_id] = record
            self.logger.info(
                "%s released, %d lightpaths removed", record_id, len(removed)
            )
            return record

    def record(self, record_id: str) -> ProvisionRecord:
        """Looks up a record.

        Raises:
            UnknownRecordError: If the record is unknown.
        """
        with self._serialized():
            if record_id not in self._records:
                raise UnknownRecordError(f"unknown record {record_id}")
            return self._records[record_id]

    def records(self) -> list[ProvisionRecord]:
        """All records, oldest first."""
        with self._serialized():
            return list(self._records.values())

    def lightpaths(self) -> list[Lightpath]:
        """Installed lightpaths, oldest first."""
        with self._serialized():
            return list(self.state.lightpaths.values())

    def snapshot(self) -> ServiceSnapshot:
        """Captures the service state."""
        with self._serialized():
            now = self.clock()
            return ServiceSnapshot(
                candidates=self.state.clp.edges,
                virtual_topology=tuple(self.state.links.values()),
                demand_routes=dict(self.state.demand_routes),
                demand_gbps=dict(self.state.demand_gbps),
                fiber_instances=self.state.spectrum.fiber_counts(),
                records=tuple(self._records.values()),
                offers=tuple(
                    PendingOffer(
                        offer=offer, remaining_s=offer.expires_at - now
                    )
                    for offer in self._offers.values()
                ),
                expired_offers=tuple(sorted(self._expired)),
                next_offer=self._next_offer,
                next_record=self._next_record,
            )

    def save_snapshot(self, path: str | Path) -> Path:
        """Writes the state to a JSON file.

        Returns:
            Path: The file written.
        """
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.snapshot().model_dump_json(indent=2))
        self.logger.info("snapshot written to %s", path)
        return path

    @classmethod
    def restore(
        cls,
        path: str | Path,
        topology: FiberGraph,
        catalog: Catalog,
        **kwargs,
    ) -> "ProvisioningService":
        """Restarts the service from a snapshot file.

        Pending offers keep their remaining lifetime.
        """
        snapshot = ServiceSnapshot.model_validate_json(Path(path).read_text())
        clp = ClpGraph(
            nodes=tuple(topology.node_ids), edges=snapshot.candidates
        )
        service = cls(
            topology,
            catalog,
            clp=clp,
            virtual_links=snapshot.virtual_topology,
            **kwargs,
        )
        state = service.state
        for link_id, count in snapshot.fiber_instances.items():
            state.spectrum.ensure_fiber_count(link_id, count)
        state.demand_routes.update(snapshot.demand_routes)
        state.demand_gbps.update(snapshot.demand_gbps)
        now = service.clock()
        for pending in snapshot.offers:
            service._offers[pending.offer.offer_id] = pending.offer.model_copy(
                update={"expires_at": now + pending.remaining_s}
            )
        for record in snapshot.records:
            service._records[record.record_id] = record
            service._record_of_offer[record.offer_id] = record.record_id
        service._expired = set(snapshot.expired_offers)
        service._next_offer = snapshot.next_offer
        service._next_record = snapshot.next_record
        return service
