"""This file contains the equipment fitting of a plan, its
bill of material, and the key performance metrics used to
compare plans."""

import math
from collections import Counter, defaultdict
from collections.abc import Iterable, Sequence

import numpy

from multilayer_planner.ingest.catalog import (
    AMPLIFIER,
    FIBER_KM,
    PROTECTION_MODULE,
    SHELF,
    Catalog,
    roadm_degree_kind,
)
from multilayer_planner.model.types import (
    BillOfMaterial,
    BomItem,
    FiberGraph,
    GridKind,
    Lightpath,
    Plan,
    PlanMetrics,
    RoadmClass,
)
from multilayer_planner.optical.spectrum import (
    SpectrumState,
    fragmentation,
    occupancy,
)
from multilayer_planner.planning.clp import PairReach

TRANSPONDER = "transponder"

BOM_CSV_HEADER = (
    "kind",
    "quantity",
    "unit_cost",
    "total_cost",
    "unit_power",
    "total_power",
)


def transponder_kind(mode_id: str) -> str:
    """Line item kind of the transponders running a mode."""
    return f"{TRANSPONDER}:{mode_id}"


def used_fiber_instances(
    lightpaths: Iterable[Lightpath],
) -> list[tuple[str, int]]:
    """(link id, fiber instance) pairs carrying at least one
    working or protection assignment, sorted."""
    used = set()
    for lightpath in lightpaths:
        for assignment in (lightpath.spectrum, lightpath.protection_spectrum):
            if assignment is None:
                continue
            used.update(
                (item.link_id, item.instance)
                for item in assignment.fiber_instances
            )
    return sorted(used)


def fit_equipment(
    plan: Plan, topology: FiberGraph, catalog: Catalog
) -> BillOfMaterial:
    """Fits the equipment a plan needs and prices it.

    Every lightpath takes 2 transponders of its mode, plus one
    protection (splitter and selector) module when it is 1+1.
    Each fiber instance carrying traffic adds a ROADM degree at
    both ends, its inline amplifiers (spans - 1) plus 2
    terminal amplifiers, and its length in fiber km. Shelves
    per node hold slots_per_shelf transponders.

    Args:
        plan (Plan): Plan with virtual topology and lightpaths.
        topology (FiberGraph): The fiber graph.
        catalog (Catalog): Modes, costs and shelf size.

    Returns:
        BillOfMaterial: Line items (zero quantities omitted) and
            totals; empty for a plan without lightpaths.
    """
    items: list[BomItem] = []

    def add(kind: str, quantity: float) -> None:
        if quantity <= 0:
            return
        entry = catalog.cost(kind)
        items.append(
            BomItem(
                kind=kind,
                quantity=quantity,
                unit_cost=entry.cost_units,
                unit_power=entry.power_w,
            )
        )

    per_mode = Counter(lightpath.mode_id for lightpath in plan.lightpaths)
    for mode_id in sorted(per_mode):
        mode = catalog.mode(mode_id)
        items.append(
            BomItem(
                kind=transponder_kind(mode_id),
                quantity=2 * per_mode[mode_id],
                unit_cost=mode.cost_units,
                unit_power=mode.power_w,
            )
        )
    add(
        PROTECTION_MODULE,
        sum(1 for lightpath in plan.lightpaths if lightpath.protected),
    )

    used = used_fiber_instances(plan.lightpaths)
    degrees: Counter[str] = Counter()
    amplifiers = 0
    fiber_km = 0.0
    for link_id, _ in used:
        link = topology.link(link_id)
        degrees[link.a] += 1
        degrees[link.b] += 1
        amplifiers += max(link.span_count - 1, 0) + 2
        fiber_km += link.length_km
    per_class: Counter[RoadmClass] = Counter()
    for node_id, count in degrees.items():
        per_class[topology.node(node_id).roadm_class] += count
    for roadm_class in RoadmClass:
        add(roadm_degree_kind(roadm_class), per_class[roadm_class])
    add(AMPLIFIER, amplifiers)
    add(FIBER_KM, fiber_km)

    add(
        SHELF,
        sum(
            math.ceil(count / catalog.slots_per_shelf)
            for count in transponders_per_node(plan).values()
        ),
    )
    return BillOfMaterial.from_items(items)


def bom_rows(bom: BillOfMaterial) -> list[tuple[str, ...]]:
    """The bill of material as CSV rows, header first."""
    rows: list[tuple[str, ...]] = [BOM_CSV_HEADER]
    for item in bom.items:
        rows.append(
            (
                item.kind,
                f"{item.quantity:g}",
                f"{item.unit_cost:g}",
                f"{item.total_cost:g}",
                f"{item.unit_power:g}",
                f"{item.total_power:g}",
            )
        )
    return rows


def summarize(
    plan: Plan,
    spectrum: SpectrumState,
    reach: Sequence[PairReach] = (),
) -> PlanMetrics:
    """Computes the key performance metrics of a plan.

    Occupancy is averaged over all fiber links (each link over
    its live fiber instances); fragmentation over all fiber
    instances of a flex grid, and reported as 0 and not
    applicable on a fixed grid.

    Args:
        plan (Plan): Plan with bill of material.
        spectrum (SpectrumState): Ledger the plan was built on.
        reach (Sequence[PairReach]): Per-pair transparent reach
            of the candidate graph. Defaults to none.

    Returns:
        PlanMetrics: The metrics.
    """
    links = plan.virtual_topology
    allocated = sum(link.allocated_gbps for link in links)
    installed = sum(link.capacity_gbps for link in links)
    counts = spectrum.fiber_counts()
    occupancies = numpy.array(
        [occupancy(spectrum, link_id) for link_id in counts]
    )
    flex = spectrum.grid.kind == GridKind.FLEX
    fragmentations = (
        [
            fragmentation(spectrum, link_id, instance)
            for link_id, instance, _ in spectrum.link_instances()
        ]
        if flex
        else []
    )
    pairs = len(reach)
    return PlanMetrics(
        transponder_count=2 * len(plan.lightpaths),
        lightpath_count=len(plan.lightpaths),
        protected_lightpath_count=sum(
            1 for lightpath in plan.lightpaths if lightpath.protected
        ),
        served_count=len(plan.demand_routes),
        unserved_count=len(plan.unserved),
        virtual_link_count=len(links),
        bypass_link_count=sum(1 for link in links if not link.one_hop),
        total_allocated_gbps=allocated,
        installed_capacity_gbps=installed,
        residual_capacity_gbps=max(installed - allocated, 0.0),
        avg_spectrum_occupancy=(
            float(occupancies.mean()) if occupancies.size else 0.0
        ),
        max_spectrum_occupancy=(
            float(occupancies.max()) if occupancies.size else 0.0
        ),
        avg_fragmentation=(
            float(numpy.mean(fragmentations)) if fragmentations else 0.0
        ),
        fragmentation_applicable=flex,
        overbuilt_fiber_count=sum(
            spectrum.overbuilt_count(link_id) for link_id in counts
        ),
        restoration_gap_count=len(plan.restoration_gaps),
        transparent_reach_ratio=(
            sum(1 for item in reach if item.shortest_feasible) / pairs
            if pairs
            else 0.0
        ),
        protected_reach_ratio=(
            sum(1 for item in reach if item.protected_feasible) / pairs
            if pairs
            else 0.0
        ),
        cost_units=plan.bom.cost_units,
        power_w=plan.bom.power_w,
        watts_per_gbps=plan.bom.power_w / allocated if allocated else 0.0,
    )


def transponders_per_node(plan: Plan) -> dict[str, int]:
    """Transponders terminating at each node, by node id."""
    endpoints = {link.id: link.endpoints for link in plan.virtual_topology}
    counts: dict[str, int] = defaultdict(int)
    for lightpath in plan.lightpaths:
        for node_id in endpoints[lightpath.virtual_link_id]:
            counts[node_id] += 1
    return dict(sorted(counts.items()))
