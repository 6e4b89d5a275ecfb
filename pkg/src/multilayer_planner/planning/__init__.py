"""Planning workflow: candidates, grooming, allocation, BOM."""

from .allocate import (
    AllocationState,
    CapacityAllocator,
    DemandAllocation,
    allocate_demand,
    install_lightpath,
    release_demand,
    route_demands,
)
from .bom import fit_equipment, summarize
from .clp import ClpGraph, PairReach, build_clp_graph, remove_infeasible
from .grooming import (
    GroomingDesign,
    GroomingLoadTable,
    VirtualTopologyDesigner,
    design_virtual_topology,
    groom,
    potential_loads,
)
from .planner import (
    NetworkPlanner,
    PlanningOutcome,
    SweepResult,
    SweepRow,
    plan_with_candidates,
    sweep_thresholds,
    threshold_range,
)
