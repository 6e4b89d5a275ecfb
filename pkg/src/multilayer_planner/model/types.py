"""This file contains the domain value types shared by every
planner module: the fiber graph, demands, transponder modes,
candidate lightpaths, virtual links, spectrum assignments
and the plan itself.

All types are frozen pydantic models, so they are immutable
after construction and serialize to and from JSON documents
without loss.
"""

import math
from enum import Enum
from typing import Any

from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    NonNegativeFloat,
    NonNegativeInt,
    PositiveFloat,
    PositiveInt,
    PrivateAttr,
    field_validator,
    model_validator,
)

from multilayer_planner.model.exceptions import UnknownEntityError


class FrozenModel(BaseModel):
    """Base class for immutable planner value types."""

    model_config = ConfigDict(frozen=True, extra="forbid")


class RoadmClass(str, Enum):
    """ROADM node architectures."""

    FIXED = "fixed"
    DIRECTIONLESS = "directionless"
    COLORLESS_DIRECTIONLESS = "colorless_directionless"


class ServiceType(str, Enum):
    """Client service types carried by demands."""

    ETHERNET = "ethernet"
    IP_MPLS = "ip_mpls"
    ODU0 = "odu0"
    ODU1 = "odu1"
    ODU2 = "odu2"

    @property
    def is_tdm(self) -> bool:
        """Whether the service is counted in ODU containers."""
        return self in ODU_RATES_GBPS


# Nominal ODU payload rates, Gbps.
ODU_RATES_GBPS: dict[ServiceType, float] = {
    ServiceType.ODU0: 1.25,
    ServiceType.ODU1: 2.5,
    ServiceType.ODU2: 10.0,
}


class ProtectionClass(str, Enum):
    """Survivability classes a demand may request."""

    UNPROTECTED = "unprotected"
    OPTICAL_PROTECTION = "optical_protection"
    OPTICAL_RESTORATION = "optical_restoration"
    PROTECTION_AND_RESTORATION = "protection_and_restoration"

    @property
    def needs_protection(self) -> bool:
        """Whether the class requires a 1+1 optical path."""
        return self in (
            ProtectionClass.OPTICAL_PROTECTION,
            ProtectionClass.PROTECTION_AND_RESTORATION,
        )

    @property
    def needs_restoration(self) -> bool:
        """Whether the class requires restoration coverage."""
        return self in (
            ProtectionClass.OPTICAL_RESTORATION,
            ProtectionClass.PROTECTION_AND_RESTORATION,
        )


class GridKind(str, Enum):
    """WDM grid flavours."""

    FIXED = "fixed"
    FLEX = "flex"


class AdminWeight(str, Enum):
    """Edge weights for fiber path computation."""

    HOPS = "hops"
    LENGTH_KM = "length_km"


class Disjointness(str, Enum):
    """Disjointness requirement for protection pairs."""

    LINK = "link"
    NODE = "node"


class RouteKindTag(str, Enum):
    """Reasons a fiber route became a candidate lightpath."""

    KTH_SHORTEST = "kth_shortest"
    DISJOINT_PROTECTION_PAIR_MEMBER = "disjoint_protection_pair_member"
    RESTORATION = "restoration"


class BindingConstraint(str, Enum):
    """First feasibility check a route failed."""

    NONE = "none"
    REACH = "reach"
    OSNR = "osnr"


class NodeSite(FrozenModel):
    """A node site hosting a ROADM."""

    id: str
    name: str = ""
    roadm_class: RoadmClass = RoadmClass.FIXED


class Span(FrozenModel):
    """One amplified fiber span."""

    length_km: PositiveFloat
    loss_db: PositiveFloat


class FiberLink(FrozenModel):
    """A fiber link between two node sites.

    Cross-field rules (span sums, endpoints) are reported by
    `validate_topology` instead of being enforced here, so that
    malformed topologies can still be diagnosed.
    """

    id: str
    a: str
    b: str
    length_km: NonNegativeFloat
    spans: tuple[Span, ...] = ()
    fiber_count: PositiveInt = 1

    @property
    def endpoints(self) -> tuple[str, str]:
        """The two node ids of the link."""
        return (self.a, self.b)

    @property
    def span_count(self) -> int:
        """Number of spans on the link."""
        return len(self.spans)

    def other_end(self, node_id: str) -> str:
        """Returns the endpoint opposite to node_id.

        Raises:
            ValueError: If node_id is not an endpoint.
        """
        if node_id == self.a:
            return self.b
        if node_id == self.b:
            return self.a
        raise ValueError(f"{node_id} is not an endpoint of {self.id}.")


class FiberGraph(FrozenModel):
    """The physical layer: node sites and fiber links."""

    nodes: tuple[NodeSite, ...] = ()
    links: tuple[FiberLink, ...] = ()

    _nodes_by_id: dict[str, NodeSite] = PrivateAttr(default_factory=dict)
    _links_by_id: dict[str, FiberLink] = PrivateAttr(default_factory=dict)

    def model_post_init(self, __context: Any) -> None:
        self._nodes_by_id.update({node.id: node for node in self.nodes})
        self._links_by_id.update({link.id: link for link in self.links})

    @property
    def node_ids(self) -> list[str]:
        """Node ids in document order."""
        return [node.id for node in self.nodes]

    def has_node(self, node_id: str) -> bool:
        """Whether node_id names a node site."""
        return node_id in self._nodes_by_id

    def has_link(self, link_id: str) -> bool:
        """Whether link_id names a fiber link."""
        return link_id in self._links_by_id

    def node(self, node_id: str) -> NodeSite:
        """Looks up a node site.

        Raises:
            UnknownEntityError: If there is no such node.
        """
        try:
            return self._nodes_by_id[node_id]
        except KeyError as err:
            raise UnknownEntityError("node", node_id) from err

    def link(self, link_id: str) -> FiberLink:
        """Looks up a fiber link.

        Raises:
            UnknownEntityError: If there is no such link.
        """
        try:
            return self._links_by_id[link_id]
        except KeyError as err:
            raise UnknownEntityError("link", link_id) from err


class Demand(FrozenModel):
    """A traffic request between two node sites."""

    id: str
    src: str
    dst: str
    service_type: ServiceType
    bitrate_gbps: PositiveFloat | None = None
    count: PositiveInt | None = None
    protection: ProtectionClass = ProtectionClass.UNPROTECTED
    explicit_route: tuple[str, ...] | None = None

    @model_validator(mode="after")
    def _check_demand(self) -> "Demand":
        if self.src == self.dst:
            raise ValueError(f"demand {self.id}: src equals dst {self.src}")
        if (self.bitrate_gbps is None) == (self.count is None):
            raise ValueError(
                f"demand {self.id}: exactly one of bitrate_gbps/count "
                "must be set"
            )
        if self.service_type.is_tdm and self.count is None:
            raise ValueError(
                f"demand {self.id}: {self.service_type.value} needs count"
            )
        if not self.service_type.is_tdm and self.bitrate_gbps is None:
            raise ValueError(
                f"demand {self.id}: {self.service_type.value} needs "
                "bitrate_gbps"
            )
        if self.explicit_route is not None and (
            len(self.explicit_route) < 2
            or self.explicit_route[0] != self.src
            or self.explicit_route[-1] != self.dst
        ):
            raise ValueError(
                f"demand {self.id}: explicit_route must run from "
                f"{self.src} to {self.dst}"
            )
        return self

    @property
    def effective_bitrate_gbps(self) -> float:
        """Bitrate the demand consumes, Gbps."""
        if self.count is not None:
            return self.count * ODU_RATES_GBPS[self.service_type]
        assert self.bitrate_gbps is not None
        return self.bitrate_gbps


class TransponderMode(FrozenModel):
    """One operating mode of a transponder: line rate,
    modulation, spectral width and optical requirements."""

    id: str
    line_rate_gbps: PositiveFloat
    modulation: str
    slot_width_ghz: PositiveFloat | None = None
    fixed_channel: bool = False
    required_osnr_db: float
    max_reach_km: PositiveFloat
    roadm_passthrough_penalty_db: NonNegativeFloat = 0.0
    cost_units: NonNegativeFloat = 0.0
    power_w: NonNegativeFloat = 0.0

    @model_validator(mode="after")
    def _check_grid_support(self) -> "TransponderMode":
        if self.slot_width_ghz is None and not self.fixed_channel:
            raise ValueError(
                f"mode {self.id}: needs slot_width_ghz or fixed_channel"
            )
        return self


class MarginStack(FrozenModel):
    """End-of-life margins added to every OSNR requirement."""

    aging_margin_db: float = 0.0
    span_repair_margin_db: float = 0.0
    operator_margin_db: float = 0.0

    @field_validator("*")
    @classmethod
    def _non_negative(cls, value: float, info: Any) -> float:
        if value < 0:
            raise ValueError(f"negative margin {info.field_name}={value}")
        return value

    @property
    def total_db(self) -> float:
        """Sum of all margins, dB."""
        return (
            self.aging_margin_db
            + self.span_repair_margin_db
            + self.operator_margin_db
        )


class GridSpec(FrozenModel):
    """The WDM channel plan.

    A fixed grid has `channel_count` channels of
    `channel_spacing_ghz`; a flex grid has `total_slots` slots
    of `slot_granularity_ghz`.
    """

    kind: GridKind = GridKind.FLEX
    channel_count: PositiveInt = 96
    channel_spacing_ghz: PositiveFloat = 50.0
    slot_granularity_ghz: PositiveFloat = 12.5
    total_slots: PositiveInt = 384

    @property
    def size(self) -> int:
        """Number of allocatable cells (channels or slots)."""
        if self.kind == GridKind.FIXED:
            return self.channel_count
        return self.total_slots

    @property
    def usable_band_ghz(self) -> float:
        """Width of the usable band, GHz."""
        if self.kind == GridKind.FIXED:
            return self.channel_count * self.channel_spacing_ghz
        return self.total_slots * self.slot_granularity_ghz

    def supports(self, mode: TransponderMode) -> bool:
        """Whether a mode can be placed on this grid."""
        if self.kind == GridKind.FIXED:
            return mode.fixed_channel
        return mode.slot_width_ghz is not None

    def width_for(self, mode: TransponderMode) -> int:
        """Number of cells a mode occupies on this grid.

        Raises:
            ValueError: If the grid does not support the mode, or
                the slot width is not a multiple of the slot
                granularity.
        """
        if not self.supports(mode):
            raise ValueError(
                f"mode {mode.id} is not usable on a {self.kind.value} grid."
            )
        if self.kind == GridKind.FIXED:
            return 1
        assert mode.slot_width_ghz is not None
        ratio = mode.slot_width_ghz / self.slot_granularity_ghz
        slots = round(ratio)
        if slots < 1 or not math.isclose(ratio, slots, abs_tol=1e-9):
            raise ValueError(
                f"mode {mode.id}: slot width {mode.slot_width_ghz} GHz is "
                f"not a multiple of {self.slot_granularity_ghz} GHz."
            )
        return slots


class RouteKind(FrozenModel):
    """Why a route is in the candidate lightpath graph."""

    tag: RouteKindTag
    k: PositiveInt | None = None
    failed_link_id: str | None = None

    @model_validator(mode="after")
    def _check_variant(self) -> "RouteKind":
        if (self.tag == RouteKindTag.KTH_SHORTEST) != (self.k is not None):
            raise ValueError("k is set exactly for kth_shortest kinds")
        if (self.tag == RouteKindTag.RESTORATION) != (
            self.failed_link_id is not None
        ):
            raise ValueError(
                "failed_link_id is set exactly for restoration kinds"
            )
        return self

    @classmethod
    def kth_shortest(cls, k: int) -> "RouteKind":
        """The k-th shortest fiber path."""
        return cls(tag=RouteKindTag.KTH_SHORTEST, k=k)

    @classmethod
    def protection_member(cls) -> "RouteKind":
        """A member of the shortest disjoint pair."""
        return cls(tag=RouteKindTag.DISJOINT_PROTECTION_PAIR_MEMBER)

    @classmethod
    def restoration(cls, failed_link_id: str) -> "RouteKind":
        """The best path avoiding a failed link."""
        return cls(tag=RouteKindTag.RESTORATION, failed_link_id=failed_link_id)


class PathMetrics(FrozenModel):
    """Cascaded optical metrics of one fiber route."""

    total_length_km: NonNegativeFloat
    span_count: PositiveInt
    roadm_passthrough_count: NonNegativeInt
    osnr_db: float
    effective_required_osnr_db: float = 0.0

    @field_validator("osnr_db")
    @classmethod
    def _finite(cls, value: float) -> float:
        if not math.isfinite(value):
            raise ValueError(f"osnr_db must be finite, got {value}")
        return value


class FeasibleMode(FrozenModel):
    """A transponder mode that closes on a route, with the
    metrics it was judged by."""

    mode_id: str
    metrics: PathMetrics


class CandidateLightpath(FrozenModel):
    """An edge of the candidate lightpath graph: a fiber route
    between two nodes and the modes that are feasible on it."""

    id: str
    endpoints: tuple[str, str]
    nodes: tuple[str, ...]
    route: tuple[str, ...]
    length_km: NonNegativeFloat
    kinds: tuple[RouteKind, ...]
    feasible_modes: tuple[FeasibleMode, ...] = ()
    partner_id: str | None = None

    @model_validator(mode="after")
    def _check_route(self) -> "CandidateLightpath":
        if not self.route or len(self.nodes) != len(self.route) + 1:
            raise ValueError(f"{self.id}: nodes and route disagree")
        if (self.nodes[0], self.nodes[-1]) != self.endpoints:
            raise ValueError(f"{self.id}: route does not join endpoints")
        if len(set(self.nodes)) != len(self.nodes):
            raise ValueError(f"{self.id}: route is not simple")
        if not self.kinds:
            raise ValueError(f"{self.id}: needs at least one kind")
        return self

    @property
    def kind(self) -> RouteKind:
        """The first reason the route was added."""
        return self.kinds[0]

    @property
    def is_one_hop(self) -> bool:
        """Whether the route is a single fiber link."""
        return len(self.route) == 1

    @property
    def mode_ids(self) -> list[str]:
        """Ids of the feasible modes."""
        return [feasible.mode_id for feasible in self.feasible_modes]

    def has_kind(self, tag: RouteKindTag) -> bool:
        """Whether any of the kinds carries tag."""
        return any(kind.tag == tag for kind in self.kinds)


class LinkInstance(FrozenModel):
    """The parallel fiber used on one link of a route."""

    link_id: str
    instance: NonNegativeInt = 0


class SpectrumAssignment(FrozenModel):
    """A channel (fixed grid) or slot range (flex grid) held
    continuously on every link of a route."""

    kind: GridKind
    channel_index: NonNegativeInt | None = None
    slot_range: tuple[NonNegativeInt, NonNegativeInt] | None = None
    fiber_instances: tuple[LinkInstance, ...]

    @model_validator(mode="after")
    def _check_variant(self) -> "SpectrumAssignment":
        if self.kind == GridKind.FIXED:
            if self.channel_index is None or self.slot_range is not None:
                raise ValueError("fixed grid assignments use channel_index")
        elif self.slot_range is None or self.channel_index is not None:
            raise ValueError("flex grid assignments use slot_range")
        elif self.slot_range[1] <= self.slot_range[0]:
            raise ValueError(f"empty slot range {self.slot_range}")
        if not self.fiber_instances:
            raise ValueError("assignment without links")
        return self

    @property
    def start(self) -> int:
        """First occupied cell."""
        if self.slot_range is not None:
            return self.slot_range[0]
        assert self.channel_index is not None
        return self.channel_index

    @property
    def width(self) -> int:
        """Number of occupied cells."""
        if self.slot_range is not None:
            return self.slot_range[1] - self.slot_range[0]
        return 1

    @property
    def link_ids(self) -> list[str]:
        """Links of the route, in route order."""
        return [item.link_id for item in self.fiber_instances]


class Lightpath(FrozenModel):
    """An installed optical channel of a virtual link."""

    id: str
    virtual_link_id: str
    mode_id: str
    spectrum: SpectrumAssignment
    protection_spectrum: SpectrumAssignment | None = None

    @property
    def protected(self) -> bool:
        """Whether the lightpath is 1+1 protected."""
        return self.protection_spectrum is not None


class VirtualLink(FrozenModel):
    """A candidate lightpath selected as a grooming link."""

    id: str
    clp_id: str
    endpoints: tuple[str, str]
    selected_mode: str
    line_rate_gbps: PositiveFloat
    length_km: NonNegativeFloat
    one_hop: bool = False
    protected: bool = False
    lightpaths: tuple[Lightpath, ...] = ()
    allocated_gbps: NonNegativeFloat = 0.0

    @model_validator(mode="after")
    def _check_capacity(self) -> "VirtualLink":
        if self.allocated_gbps > self.capacity_gbps + 1e-9:
            raise ValueError(
                f"{self.id}: allocated {self.allocated_gbps} exceeds "
                f"installed {self.capacity_gbps}"
            )
        return self

    @property
    def capacity_gbps(self) -> float:
        """Installed capacity, Gbps."""
        return len(self.lightpaths) * self.line_rate_gbps

    @property
    def residual_gbps(self) -> float:
        """Installed but unallocated capacity, Gbps."""
        return self.capacity_gbps - self.allocated_gbps


class UnservedDemand(FrozenModel):
    """A demand the planner could not place, with the reason."""

    demand_id: str
    reason: str


class RestorationGap(FrozenModel):
    """A single-link failure on a virtual link used by a
    restoration-class demand for which no restoration candidate
    exists."""

    demand_id: str
    virtual_link_id: str
    failed_link_id: str


class BomItem(FrozenModel):
    """One line of the bill of material."""

    kind: str
    quantity: NonNegativeFloat
    unit_cost: NonNegativeFloat
    unit_power: NonNegativeFloat

    @property
    def total_cost(self) -> float:
        """Quantity times unit cost."""
        return self.quantity * self.unit_cost

    @property
    def total_power(self) -> float:
        """Quantity times unit power."""
        return self.quantity * self.unit_power


class BillOfMaterial(FrozenModel):
    """Priced equipment list of a plan."""

    items: tuple[BomItem, ...] = ()
    cost_units: NonNegativeFloat = 0.0
    power_w: NonNegativeFloat = 0.0

    @model_validator(mode="after")
    def _check_totals(self) -> "BillOfMaterial":
        cost = sum(item.total_cost for item in self.items)
        power = sum(item.total_power for item in self.items)
        if not (
            math.isclose(cost, self.cost_units, rel_tol=1e-9, abs_tol=1e-9)
            and math.isclose(power, self.power_w, rel_tol=1e-9, abs_tol=1e-9)
        ):
            raise ValueError("bill of material totals do not match items")
        return self

    @classmethod
    def from_items(cls, items: list[BomItem]) -> "BillOfMaterial":
        """Builds a bill of material and its totals from line items."""
        return cls(
            items=tuple(items),
            cost_units=sum(item.total_cost for item in items),
            power_w=sum(item.total_power for item in items),
        )

    def quantity(self, kind: str) -> float:
        """Total quantity of a line item kind (0 when absent)."""
        return sum(item.quantity for item in self.items if item.kind == kind)


class PlanMetrics(FrozenModel):
    """Key performance figures of a plan."""

    transponder_count: NonNegativeInt = 0
    lightpath_count: NonNegativeInt = 0
    protected_lightpath_count: NonNegativeInt = 0
    served_count: NonNegativeInt = 0
    unserved_count: NonNegativeInt = 0
    virtual_link_count: NonNegativeInt = 0
    bypass_link_count: NonNegativeInt = 0
    total_allocated_gbps: NonNegativeFloat = 0.0
    installed_capacity_gbps: NonNegativeFloat = 0.0
    residual_capacity_gbps: NonNegativeFloat = 0.0
    avg_spectrum_occupancy: NonNegativeFloat = 0.0
    max_spectrum_occupancy: NonNegativeFloat = 0.0
    avg_fragmentation: NonNegativeFloat = 0.0
    fragmentation_applicable: bool = True
    overbuilt_fiber_count: NonNegativeInt = 0
    restoration_gap_count: NonNegativeInt = 0
    transparent_reach_ratio: NonNegativeFloat = 0.0
    protected_reach_ratio: NonNegativeFloat = 0.0
    cost_units: NonNegativeFloat = 0.0
    power_w: NonNegativeFloat = 0.0
    watts_per_gbps: NonNegativeFloat = 0.0


class Plan(FrozenModel):
    """A complete planning result."""

    grooming_threshold: float
    grid: GridSpec
    candidates: tuple[CandidateLightpath, ...] = ()
    virtual_topology: tuple[VirtualLink, ...] = ()
    demand_routes: dict[str, tuple[str, ...]] = Field(default_factory=dict)
    lightpaths: tuple[Lightpath, ...] = ()
    unserved: tuple[UnservedDemand, ...] = ()
    restoration_gaps: tuple[RestorationGap, ...] = ()
    fiber_instances: dict[str, int] = Field(default_factory=dict)
    bom: BillOfMaterial = BillOfMaterial()
    metrics: PlanMetrics = PlanMetrics()

    @model_validator(mode="after")
    def _check_partition(self) -> "Plan":
        both = set(self.demand_routes) & {
            item.demand_id for item in self.unserved
        }
        if both:
            raise ValueError(f"demands both served and unserved: {both}")
        return self
