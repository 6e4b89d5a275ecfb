"""Shared domain types of the planner."""

from .exceptions import (
    IngestError,
    OfferExpiredError,
    OverbuildDisabledError,
    PlannerError,
    RequestRefusedError,
    ServiceError,
    SpectrumExhaustedError,
    UnknownEntityError,
    UnknownOfferError,
    UnknownRecordError,
)
from .types import (
    ODU_RATES_GBPS,
    AdminWeight,
    BillOfMaterial,
    BindingConstraint,
    BomItem,
    CandidateLightpath,
    Demand,
    Disjointness,
    FeasibleMode,
    FiberGraph,
    FiberLink,
    GridKind,
    GridSpec,
    Lightpath,
    LinkInstance,
    MarginStack,
    NodeSite,
    PathMetrics,
    Plan,
    PlanMetrics,
    ProtectionClass,
    RestorationGap,
    RoadmClass,
    RouteKind,
    RouteKindTag,
    ServiceType,
    Span,
    SpectrumAssignment,
    TransponderMode,
    UnservedDemand,
    VirtualLink,
)
from .validation import validate_topology
