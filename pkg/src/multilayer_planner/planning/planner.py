"""This file contains the offline planning pipeline (candidate
lightpaths, virtual topology design, demand allocation with
spectrum, equipment fitting) and the grooming threshold sweep.
"""

import logging
from collections.abc import Sequence
from multiprocessing import Pool
from pathlib import Path

import numpy
from pydantic import field_validator

from multilayer_planner.ingest.catalog import Catalog
from multilayer_planner.logger import LoggerMixin
from multilayer_planner.model.types import (
    Demand,
    FiberGraph,
    FrozenModel,
    Plan,
)
from multilayer_planner.planning.allocate import (
    AllocationState,
    CapacityAllocator,
    route_demands,
)
from multilayer_planner.planning.bom import fit_equipment, summarize
from multilayer_planner.planning.clp import ClpGraph, build_clp_graph
from multilayer_planner.planning.grooming import (
    GroomingDesign,
    VirtualTopologyDesigner,
    groom,
)


class PlanningOutcome(FrozenModel):
    """A plan with the grooming design that produced it."""

    plan: Plan
    design: GroomingDesign


class SweepRow(FrozenModel):
    """Plan quality at one grooming threshold."""

    grooming_threshold: float
    transponder_count: int
    lightpath_count: int
    cost_units: float
    avg_fragmentation: float
    unserved_count: int
    virtual_link_count: int
    bypass_link_count: int


class SweepResult(FrozenModel):
    """One row per threshold, thresholds strictly increasing."""

    rows: tuple[SweepRow, ...]

    @field_validator("rows")
    @classmethod
    def _increasing(cls, rows: tuple[SweepRow, ...]) -> tuple[SweepRow, ...]:
        thresholds = [row.grooming_threshold for row in rows]
        if any(b <= a for a, b in zip(thresholds, thresholds[1:])):
            raise ValueError("thresholds must be strictly increasing")
        return rows


SWEEP_CSV_HEADER = tuple(SweepRow.model_fields)


def threshold_range(start: float, stop: float, step: float) -> list[float]:
    """Thresholds from start to stop (inclusive) in steps.

    Args:
        start (float): First threshold.
        stop (float): Last threshold.
        step (float): Increment.

    Returns:
        list[float]: Thresholds rounded to 10 digits.

    Raises:
        ValueError: If step is not positive or stop < start.
    """
    if step <= 0 or stop < start:
        raise ValueError(f"bad threshold range {start}:{stop}:{step}.")
    values = numpy.arange(start, stop + step / 2, step)
    return [float(value) for value in numpy.round(values, 10)]


def assemble_plan(
    state: AllocationState,
    clp: ClpGraph,
    design: GroomingDesign,
    catalog: Catalog,
) -> Plan:
    """Freezes an allocation into a plan with its bill of
    material and metrics.

    Args:
        state (AllocationState): Completed allocation.
        clp (ClpGraph): Candidate graph the plan was designed on.
        design (GroomingDesign): The virtual topology design.
        catalog (Catalog): The catalog.

    Returns:
        Plan: The plan; maps and lists are in a fixed order.
    """
    plan = Plan(
        grooming_threshold=design.threshold,
        grid=catalog.grid,
        candidates=clp.edges,
        virtual_topology=tuple(state.links.values()),
        demand_routes=dict(sorted(state.demand_routes.items())),
        lightpaths=tuple(state.lightpaths.values()),
        unserved=tuple(
            state.unserved[demand_id] for demand_id in sorted(state.unserved)
        ),
        restoration_gaps=tuple(state.restoration_gaps),
        fiber_instances=state.spectrum.fiber_counts(),
    )
    plan = plan.model_copy(
        update={"bom": fit_equipment(plan, state.topology, catalog)}
    )
    return plan.model_copy(
        update={"metrics": summarize(plan, state.spectrum, clp.reach)}
    )


def plan_with_candidates(
    topology: FiberGraph,
    demands: Sequence[Demand],
    catalog: Catalog,
    clp: ClpGraph,
    threshold: float | None = None,
) -> PlanningOutcome:
    """Runs grooming, allocation and equipment fitting on a
    built candidate graph.

    Args:
        topology (FiberGraph): The fiber graph.
        demands (Sequence[Demand]): The demands.
        catalog (Catalog): The catalog.
        clp (ClpGraph): Feasible candidate graph.
        threshold (float | None): Grooming threshold override.
            Defaults to None.

    Returns:
        PlanningOutcome: The plan and its grooming design.
    """
    design = groom(clp, demands, catalog, threshold)
    state = AllocationState(topology, clp, design.links, catalog)
    route_demands(state, demands)
    return PlanningOutcome(
        plan=assemble_plan(state, clp, design, catalog), design=design
    )


def _sweep_job(
    job: tuple[FiberGraph, Sequence[Demand], Catalog, ClpGraph, float]
) -> SweepRow:
    topology, demands, catalog, clp, threshold = job
    metrics = plan_with_candidates(
        topology, demands, catalog, clp, threshold
    ).plan.metrics
    return SweepRow(
        grooming_threshold=threshold,
        transponder_count=metrics.transponder_count,
        lightpath_count=metrics.lightpath_count,
        cost_units=metrics.cost_units,
        avg_fragmentation=metrics.avg_fragmentation,
        unserved_count=metrics.unserved_count,
        virtual_link_count=metrics.virtual_link_count,
        bypass_link_count=metrics.bypass_link_count,
    )


def sweep_thresholds(
    topology: FiberGraph,
    demands: Sequence[Demand],
    catalog: Catalog,
    thresholds: Sequence[float],
    clp: ClpGraph | None = None,
    workers: int | None = None,
) -> SweepResult:
    """Plans once per grooming threshold, sharing the candidate
    graph.

    Args:
        topology (FiberGraph): The fiber graph.
        demands (Sequence[Demand]): The demands.
        catalog (Catalog): The catalog.
        thresholds (Sequence[float]): Thresholds in (0, 1].
        clp (ClpGraph | None): Prebuilt candidate graph. Defaults
            to None (built here).
        workers (int | None): Worker processes. Defaults to
            planner_params.workers.

    Returns:
        SweepResult: One row per threshold, ascending.
    """
    workers = workers or catalog.planner_params.workers
    if clp is None:
        clp = build_clp_graph(topology, catalog, workers)
    jobs = [
        (topology, demands, catalog, clp, threshold)
        for threshold in sorted(set(thresholds))
    ]
    if workers > 1 and len(jobs) > 1:
        with Pool(processes=workers) as pool:
            rows = pool.map(_sweep_job, jobs)
    else:
        rows = [_sweep_job(job) for job in jobs]
    return SweepResult(rows=tuple(rows))


class NetworkPlanner(LoggerMixin):
    """Runs the planning workflow for one set of inputs and
    logs every phase.

    Attributes:
        topology (FiberGraph): The fiber graph.
        demands (list[Demand]): The demands.
        catalog (Catalog): The catalog.
    """

    def __init__(
        self,
        topology: FiberGraph,
        demands: Sequence[Demand],
        catalog: Catalog,
        logger_filename: str | Path | None = None,
        logger_level: int = logging.INFO,
    ):
        super().__init__(
            logger_filename=logger_filename, logger_level=logger_level
        )
        self.logger_level = logger_level
        self.topology = topology
        self.demands = list(demands)
        self.catalog = catalog
        self._clp: ClpGraph | None = None

    def candidates(self) -> ClpGraph:
        """The feasible candidate graph, built on first use."""
        if self._clp is None:
            self._clp = build_clp_graph(self.topology, self.catalog)
            for line in self._clp.diagnostics:
                self.logger.warning(line)
            self.logger.info(
                "%d candidate lightpaths over %d nodes",
                len(self._clp.edges),
                len(self._clp.nodes),
            )
        return self._clp

    def plan(self, threshold: float | None = None) -> PlanningOutcome:
        """Plans the network.

        Args:
            threshold (float | None): Grooming threshold
                override. Defaults to None (catalog value).

        Returns:
            PlanningOutcome: The plan and its grooming design.
        """
        clp = self.candidates()
        designer = VirtualTopologyDesigner(
            self.catalog,
            logger_filename=self.logger_filename,
            logger_level=self.logger_level,
        )
        design = designer.design(clp, self.demands, threshold)
        designer.close_logger()
        state = AllocationState(
            self.topology, clp, design.links, self.catalog
        )
        allocator = CapacityAllocator(
            state,
            logger_filename=self.logger_filename,
            logger_level=self.logger_level,
        )
        allocator.allocate(self.demands)
        allocator.close_logger()
        plan = assemble_plan(state, clp, design, self.catalog)
        self.logger.info(
            "plan: %d lightpaths, %d transponders, cost %.2f, %d unserved",
            plan.metrics.lightpath_count,
            plan.metrics.transponder_count,
            plan.metrics.cost_units,
            plan.metrics.unserved_count,
        )
        return PlanningOutcome(plan=plan, design=design)

    def sweep(self, thresholds: Sequence[float]) -> SweepResult:
        """Plans at every threshold; see `sweep_thresholds`."""
        result = sweep_thresholds(
            self.topology,
            self.demands,
            self.catalog,
            thresholds,
            clp=self.candidates(),
        )
        for row in result.rows:
            self.logger.info(
                "threshold %.2f: %d transponders, cost %.2f",
                row.grooming_threshold,
                row.transponder_count,
                row.cost_units,
            )
        return result
