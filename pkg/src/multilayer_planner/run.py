"""Run the multilayer_planner app."""

import csv
import logging
from collections.abc import Iterable, Sequence
from pathlib import Path
from typing import Optional

import typer
from pydantic import ValidationError
from typing_extensions import Annotated

from multilayer_planner.graphs.draw_allocation import (
    allocation_table,
    draw_allocation_table,
    format_allocation_table,
)
from multilayer_planner.ingest.catalog import (
    Catalog,
    DemandOrder,
    SpectrumPolicy,
)
from multilayer_planner.ingest.loaders import (
    load_catalog,
    load_demands,
    load_topology,
)
from multilayer_planner.model.exceptions import IngestError
from multilayer_planner.model.types import (
    Demand,
    FiberGraph,
    GridKind,
    Plan,
)
from multilayer_planner.planning.bom import bom_rows
from multilayer_planner.planning.grooming import GroomingDesign
from multilayer_planner.planning.planner import (
    SWEEP_CSV_HEADER,
    NetworkPlanner,
    SweepResult,
    threshold_range,
)
from multilayer_planner.service.provisioning import ProvisioningService
from multilayer_planner.service.rest import create_app

EXIT_INVALID_INPUT = 2
EXIT_UNSERVED = 3

app = typer.Typer()
state = {"verbosity": 0}

TopologyOption = Annotated[
    Path, typer.Option(..., "--topology", help="Topology document.")
]
DemandsOption = Annotated[
    Path, typer.Option(..., "--demands", help="Demand matrix document.")
]
CatalogOption = Annotated[
    Path, typer.Option(..., "--catalog", help="Equipment catalog.")
]
KPathsOption = Annotated[Optional[int], typer.Option("--k-paths")]
KGroomingOption = Annotated[Optional[int], typer.Option("--k-grooming")]
GridOption = Annotated[Optional[GridKind], typer.Option("--grid")]
PolicyOption = Annotated[
    Optional[SpectrumPolicy], typer.Option("--spectrum-policy")
]
OrderOption = Annotated[Optional[DemandOrder], typer.Option("--demand-order")]
SinglePassOption = Annotated[bool, typer.Option("--single-pass")]
NoLoadSplitOption = Annotated[bool, typer.Option("--no-load-split")]
NoOverbuildOption = Annotated[bool, typer.Option("--disable-overbuild")]
WorkersOption = Annotated[Optional[int], typer.Option("--workers")]
LogFileOption = Annotated[Optional[Path], typer.Option("--log-file")]
VerbosityOption = Annotated[
    int, typer.Option("--verbosity", "-v", count=True)
]


def _fail(module: str, err: Exception, code: int) -> typer.Exit:
    typer.echo(f"{module}: {err}", err=True)
    return typer.Exit(code=code)


def _log_level(verbosity: int) -> int:
    state["verbosity"] = verbosity
    return logging.DEBUG if verbosity > 0 else logging.INFO


def _load_inputs(
    topology: Path,
    demands: Path,
    catalog: Path,
    **overrides,
) -> tuple[FiberGraph, list[Demand], Catalog]:
    """Loads the three input documents and applies the
    command-line overrides to the catalog.

    Raises:
        typer.Exit: With code 2 on any ingest or override error.
    """
    try:
        fiber_graph = load_topology(topology)
        demand_list = load_demands(demands, fiber_graph)
        equipment = load_catalog(catalog)
    except IngestError as err:
        raise _fail("ingest", err, EXIT_INVALID_INPUT) from err
    try:
        equipment = equipment.with_overrides(**overrides)
    except ValidationError as err:
        raise _fail("ingest", err, EXIT_INVALID_INPUT) from err
    return fiber_graph, demand_list, equipment


def _overrides(
    grid: GridKind | None,
    k_paths: int | None,
    k_grooming: int | None,
    spectrum_policy: SpectrumPolicy | None,
    demand_order: DemandOrder | None,
    single_pass: bool,
    no_load_split: bool,
    disable_overbuild: bool,
    workers: int | None,
) -> dict:
    # Unset flags leave the catalog values in place.
    return {
        "grid_kind": grid,
        "k_paths": k_paths,
        "k_grooming": k_grooming,
        "spectrum_policy": spectrum_policy,
        "demand_order": demand_order,
        "single_pass": True if single_pass else None,
        "load_split": False if no_load_split else None,
        "enable_overbuild": False if disable_overbuild else None,
        "workers": workers,
    }


def _cell(value: object) -> str:
    if isinstance(value, float):
        return f"{value:g}"
    return str(value)


def _write_csv(path: Path, rows: Iterable[Sequence[object]]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf8") as f:
        csv.writer(f, lineterminator="\n").writerows(rows)


def format_summary(plan: Plan) -> str:
    """Human-readable summary of a plan.

    Args:
        plan (Plan): The plan.

    Returns:
        str: Metric lines, then one line per unserved demand.
    """
    metrics = plan.metrics
    lines = [
        f"grooming threshold: {plan.grooming_threshold:g}",
        f"grid: {plan.grid.kind.value} ({plan.grid.size} cells)",
        f"candidate lightpaths: {len(plan.candidates)}",
    ]
    lines += [
        f"{name}: {_cell(value)}"
        for name, value in metrics.model_dump().items()
    ]
    lines += [
        f"unserved {item.demand_id}: {item.reason}" for item in plan.unserved
    ]
    lines += [
        f"restoration gap {gap.demand_id}: {gap.virtual_link_id} "
        f"fails with {gap.failed_link_id}"
        for gap in plan.restoration_gaps
    ]
    return "\n".join(lines) + "\n"


def _trace_rows(design: GroomingDesign) -> list[tuple]:
    rows: list[tuple] = [
        ("round", "candidate_id", "load_gbps", "capacity_gbps", "decision")
    ]
    rows += [
        (
            row.round,
            row.candidate_id,
            f"{row.load_gbps:g}",
            f"{row.capacity_gbps:g}",
            row.decision,
        )
        for row in design.trace
    ]
    return rows


def _sweep_rows(result: SweepResult) -> list[tuple]:
    rows: list[tuple] = [SWEEP_CSV_HEADER]
    rows += [
        tuple(_cell(value) for value in row.model_dump().values())
        for row in result.rows
    ]
    return rows


@app.command()
def plan(
    topology: TopologyOption,
    demands: DemandsOption,
    catalog: CatalogOption,
    out: Annotated[Path, typer.Option("--out")] = Path("plan.json"),
    grooming_threshold: Annotated[
        Optional[float], typer.Option("--grooming-threshold")
    ] = None,
    k_paths: KPathsOption = None,
    k_grooming: KGroomingOption = None,
    grid: GridOption = None,
    spectrum_policy: PolicyOption = None,
    demand_order: OrderOption = None,
    single_pass: SinglePassOption = False,
    no_load_split: NoLoadSplitOption = False,
    disable_overbuild: NoOverbuildOption = False,
    workers: WorkersOption = None,
    trace: Annotated[bool, typer.Option("--trace")] = False,
    log_file: LogFileOption = None,
    verbosity: VerbosityOption = 0,
) -> None:
    """Plans a network and writes the plan document, a summary
    and the bill of material next to it."""
    fiber_graph, demand_list, equipment = _load_inputs(
        topology,
        demands,
        catalog,
        grooming_threshold=grooming_threshold,
        **_overrides(
            grid,
            k_paths,
            k_grooming,
            spectrum_policy,
            demand_order,
            single_pass,
            no_load_split,
            disable_overbuild,
            workers,
        ),
    )
    planner = NetworkPlanner(
        fiber_graph,
        demand_list,
        equipment,
        logger_filename=log_file,
        logger_level=_log_level(verbosity),
    )
    outcome = planner.plan()
    result = outcome.plan

    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(result.model_dump_json(indent=2), encoding="utf8")
    summary = format_summary(result)
    out.with_suffix(".summary.txt").write_text(summary, encoding="utf8")
    _write_csv(out.with_suffix(".bom.csv"), bom_rows(result.bom))
    if trace:
        _write_csv(out.with_suffix(".trace.csv"), _trace_rows(outcome.design))
    typer.echo(summary, nl=False)
    typer.echo(f"plan written to {out}")
    if result.unserved:
        typer.echo(
            f"allocate: {len(result.unserved)} demand(s) unserved", err=True
        )
        raise typer.Exit(code=EXIT_UNSERVED)


@app.command()
def sweep(
    topology: TopologyOption,
    demands: DemandsOption,
    catalog: CatalogOption,
    out: Annotated[Path, typer.Option("--out")] = Path("sweep.csv"),
    thresholds: Annotated[
        Optional[str],
        typer.Option(
            "--thresholds", help="Comma separated list, e.g. 0.2,0.5,1."
        ),
    ] = None,
    threshold_span: Annotated[
        str,
        typer.Option("--range", help="start:stop:step, stop included."),
    ] = "0.1:1.0:0.1",
    k_paths: KPathsOption = None,
    k_grooming: KGroomingOption = None,
    grid: GridOption = None,
    spectrum_policy: PolicyOption = None,
    demand_order: OrderOption = None,
    single_pass: SinglePassOption = False,
    no_load_split: NoLoadSplitOption = False,
    disable_overbuild: NoOverbuildOption = False,
    workers: WorkersOption = None,
    log_file: LogFileOption = None,
    verbosity: VerbosityOption = 0,
) -> None:
    """Plans once per grooming threshold and writes one CSV row
    per threshold."""
    try:
        if thresholds is not None:
            values = [float(item) for item in thresholds.split(",") if item]
        else:
            start, stop, step = (float(x) for x in threshold_span.split(":"))
            values = threshold_range(start, stop, step)
        if not values or not all(0 < value <= 1 for value in values):
            raise ValueError(f"thresholds out of range (0, 1]: {values}")
    except ValueError as err:
        raise _fail("sweep", err, EXIT_INVALID_INPUT) from err
    fiber_graph, demand_list, equipment = _load_inputs(
        topology,
        demands,
        catalog,
        **_overrides(
            grid,
            k_paths,
            k_grooming,
            spectrum_policy,
            demand_order,
            single_pass,
            no_load_split,
            disable_overbuild,
            workers,
        ),
    )
    planner = NetworkPlanner(
        fiber_graph,
        demand_list,
        equipment,
        logger_filename=log_file,
        logger_level=_log_level(verbosity),
    )
    rows = _sweep_rows(planner.sweep(values))
    _write_csv(out, rows)
    for row in rows:
        typer.echo(",".join(str(value) for value in row))


@app.command()
def render(
    plan_file: Annotated[Path, typer.Argument(help="Plan document.")],
    csv_out: Annotated[Optional[Path], typer.Option("--csv")] = None,
    png: Annotated[Optional[Path], typer.Option("--png")] = None,
) -> None:
    """Prints the wavelength allocation table of a plan."""
    try:
        result = Plan.model_validate_json(plan_file.read_text("utf8"))
    except (OSError, ValidationError) as err:
        raise _fail("render", err, EXIT_INVALID_INPUT) from err
    header, rows = allocation_table(result)
    typer.echo(format_allocation_table(header, rows), nl=False)
    if csv_out is not None:
        _write_csv(csv_out, [header, *rows])
    if png is not None:
        draw_allocation_table(header, rows, png)


@app.command()
def serve(
    topology: TopologyOption,
    catalog: CatalogOption,
    plan_file: Annotated[Optional[Path], typer.Option("--plan")] = None,
    host: Annotated[str, typer.Option("--host")] = "127.0.0.1",
    port: Annotated[int, typer.Option("--port")] = 8080,
    offer_ttl: Annotated[float, typer.Option("--offer-ttl")] = 60.0,
    expose_routes: Annotated[bool, typer.Option("--expose-routes")] = False,
    snapshot: Annotated[Optional[Path], typer.Option("--snapshot")] = None,
    log_file: LogFileOption = None,
    verbosity: VerbosityOption = 0,
) -> None:
    """Starts the provisioning service. An existing snapshot file
    is restored; otherwise the service starts from the plan, or
    from a fresh network without one."""
    try:
        fiber_graph = load_topology(topology)
        equipment = load_catalog(catalog)
    except IngestError as err:
        raise _fail("ingest", err, EXIT_INVALID_INPUT) from err
    options = {
        "offer_ttl_s": offer_ttl,
        "expose_routes": expose_routes,
        "logger_filename": log_file,
        "logger_level": _log_level(verbosity),
    }
    try:
        if snapshot is not None and snapshot.exists():
            service = ProvisioningService.restore(
                snapshot, fiber_graph, equipment, **options
            )
        elif plan_file is not None:
            service = ProvisioningService.from_plan(
                Plan.model_validate_json(plan_file.read_text("utf8")),
                fiber_graph,
                equipment,
                **options,
            )
        else:
            service = ProvisioningService(fiber_graph, equipment, **options)
    except (OSError, ValidationError) as err:
        raise _fail("service", err, EXIT_INVALID_INPUT) from err
    create_app(service, snapshot).run(host=host, port=port)


def run() -> None:
    """Entrypoint for poetry."""
    app()


if __name__ == "__main__":
    app()
