"""This file contains the optical performance evaluation of
fiber routes: cascaded OSNR and reach metrics, and the
feasibility verdict of each transponder mode against its
threshold vector plus end-of-life margins."""

import numpy

from multilayer_planner.graphs.paths import FiberPath
from multilayer_planner.ingest.catalog import Catalog, ImpairmentConstants
from multilayer_planner.model.types import (
    BindingConstraint,
    FeasibleMode,
    FiberGraph,
    FrozenModel,
    MarginStack,
    PathMetrics,
    TransponderMode,
)


class FeasibilityVerdict(FrozenModel):
    """Outcome of checking one mode on one route."""

    mode_id: str
    feasible: bool
    metrics: PathMetrics
    binding_constraint: BindingConstraint


def span_osnr_db(
    loss_db: numpy.ndarray | float,
    constants: ImpairmentConstants = ImpairmentConstants(),
) -> numpy.ndarray:
    """Per-span OSNR: reference - span loss - noise figure.

    Args:
        loss_db (numpy.ndarray | float): Span losses.
        constants (ImpairmentConstants): Reference and noise
            figure. Defaults to 58 dB and 6 dB.

    Returns:
        numpy.ndarray: OSNR of each span, dB.
    """
    return (
        constants.reference_osnr_db
        - numpy.asarray(loss_db, dtype=float)
        - constants.noise_figure_db
    )


def cascade_osnr_db(span_osnrs_db: numpy.ndarray) -> float:
    """Combines per-span OSNRs: noise powers add linearly.

    Args:
        span_osnrs_db (numpy.ndarray): Span OSNRs, dB.

    Returns:
        float: End-to-end OSNR, dB.
    """
    noise = numpy.sum(numpy.power(10.0, -numpy.asarray(span_osnrs_db) / 10))
    return float(-10 * numpy.log10(noise))


def path_metrics(
    route: FiberPath,
    topology: FiberGraph,
    constants: ImpairmentConstants = ImpairmentConstants(),
) -> PathMetrics:
    """Computes the cascaded metrics of a fiber route.

    Args:
        route (FiberPath): The route.
        topology (FiberGraph): Graph the route lives in.
        constants (ImpairmentConstants): OSNR constants.
            Defaults to 58 dB reference and 6 dB noise figure.

    Returns:
        PathMetrics: Length, span count, pass-through count and
            OSNR. effective_required_osnr_db is left at 0; it is
            mode dependent and filled by evaluate_mode.
    """
    links = [topology.link(link_id) for link_id in route.links]
    losses = numpy.array(
        [span.loss_db for link in links for span in link.spans]
    )
    return PathMetrics(
        total_length_km=sum(link.length_km for link in links),
        span_count=len(losses),
        roadm_passthrough_count=len(route.nodes) - 2,
        osnr_db=cascade_osnr_db(span_osnr_db(losses, constants)),
    )


def evaluate_mode(
    route_metrics: PathMetrics,
    mode: TransponderMode,
    margins: MarginStack,
) -> FeasibilityVerdict:
    """Checks a transponder mode against route metrics.

    The mode closes when the route is within its reach and the
    OSNR covers the back-to-back requirement plus the ROADM
    pass-through penalties and all margins. Reach is checked
    before OSNR; the first failing check is reported.

    Args:
        route_metrics (PathMetrics): Metrics from path_metrics.
        mode (TransponderMode): The mode to check.
        margins (MarginStack): End-of-life margins.

    Returns:
        FeasibilityVerdict: Verdict with the mode's effective
            requirement stored in its metrics.
    """
    required = (
        mode.required_osnr_db
        + route_metrics.roadm_passthrough_count
        * mode.roadm_passthrough_penalty_db
        + margins.total_db
    )
    metrics = route_metrics.model_copy(
        update={"effective_required_osnr_db": required}
    )
    if route_metrics.total_length_km > mode.max_reach_km:
        binding = BindingConstraint.REACH
    elif route_metrics.osnr_db < required:
        binding = BindingConstraint.OSNR
    else:
        binding = BindingConstraint.NONE
    return FeasibilityVerdict(
        mode_id=mode.id,
        feasible=binding == BindingConstraint.NONE,
        metrics=metrics,
        binding_constraint=binding,
    )


def filter_modes(
    route: FiberPath, topology: FiberGraph, catalog: Catalog
) -> list[FeasibleMode]:
    """Lists the catalog modes that close on a route.

    Modes the catalog grid cannot carry are skipped.

    Args:
        route (FiberPath): The route.
        topology (FiberGraph): Graph the route lives in.
        catalog (Catalog): Modes, margins and constants.

    Returns:
        list[FeasibleMode]: Feasible modes in catalog order;
            empty when the route is infeasible for every mode.
    """
    metrics = path_metrics(route, topology, catalog.impairment)
    feasible = []
    for mode in catalog.usable_modes:
        verdict = evaluate_mode(metrics, mode, catalog.margins)
        if verdict.feasible:
            feasible.append(
                FeasibleMode(mode_id=mode.id, metrics=verdict.metrics)
            )
    return feasible
