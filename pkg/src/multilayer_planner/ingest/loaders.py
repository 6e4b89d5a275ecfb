"""This file contains the loaders for the three input
documents: topology, demand matrix and equipment catalog.

Documents are YAML (JSON is accepted as a YAML subset):

    topology: {nodes: [{id, name, roadm_class}],
               links: [{id, a, b, length_km, spans?, fiber_count?}]}
    demands:  {demands: [{id, src, dst, service_type,
               bitrate_gbps? | count?, protection, explicit_route?}]}
    catalog:  {modes: [...], grid: {...}, margins: {...},
               cost_table: {...}, planner_params: {...}}
"""

import math
from pathlib import Path
from typing import Any, TypeVar

import yaml
from pydantic import BaseModel, ValidationError

from multilayer_planner.ingest.catalog import Catalog
from multilayer_planner.model.exceptions import IngestError
from multilayer_planner.model.types import (
    Demand,
    FiberGraph,
    FiberLink,
    NodeSite,
    Span,
)
from multilayer_planner.model.validation import validate_topology

DEFAULT_SPAN_KM = 80.0
DEFAULT_LOSS_DB_PER_KM = 0.25

ModelT = TypeVar("ModelT", bound=BaseModel)


def read_document(path: str | Path, document: str) -> dict[str, Any]:
    """Reads a YAML or JSON document into a mapping.

    Args:
        path (str | Path): File to read.
        document (str): Document name used in error messages.

    Returns:
        dict[str, Any]: The parsed mapping.

    Raises:
        IngestError: If the file is missing, is not valid YAML,
            or does not hold a mapping.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf8")
    except OSError as err:
        raise IngestError(f"{document}: cannot read {path}: {err}") from err
    try:
        content = yaml.safe_load(text)
    except yaml.YAMLError as err:
        mark = getattr(err, "problem_mark", None)
        locus = f"{path}:{mark.line + 1}" if mark is not None else str(path)
        raise IngestError(
            f"{document}: syntax error", [str(err)], locus
        ) from err
    if content is None:
        content = {}
    if not isinstance(content, dict):
        raise IngestError(f"{document}: top level must be a mapping")
    return content


def _format_errors(err: ValidationError) -> list[str]:
    return [
        f"{'.'.join(str(part) for part in error['loc']) or '<entity>'}: "
        f"{error['msg']}"
        for error in err.errors()
    ]


def _parse_entity(
    model: type[ModelT],
    raw: Any,
    document: str,
    kind: str,
    index: int,
) -> ModelT:
    """Validates one entity, naming it in the error on failure."""
    try:
        return model.model_validate(raw)
    except ValidationError as err:
        entity_id = raw.get("id") if isinstance(raw, dict) else None
        label = f"{kind} {entity_id}" if entity_id else f"{kind} #{index}"
        raise IngestError(
            f"{document}: invalid {label}",
            _format_errors(err),
            f"{kind}s[{index}]",
        ) from err


def _entities(content: dict[str, Any], key: str, document: str) -> list:
    entries = content.get(key, [])
    if entries is None:
        return []
    if not isinstance(entries, list):
        raise IngestError(f"{document}: '{key}' must be a list")
    return entries


def default_spans(length_km: float) -> list[Span]:
    """Splits a link into equal spans of at most 80 km with
    0.25 dB/km loss.

    Args:
        length_km (float): Link length.

    Returns:
        list[Span]: ceil(length / 80 km) equal spans; empty for a
            zero-length link.
    """
    count = math.ceil(length_km / DEFAULT_SPAN_KM - 1e-9)
    if count <= 0:
        return []
    span_km = length_km / count
    return [
        Span(length_km=span_km, loss_db=span_km * DEFAULT_LOSS_DB_PER_KM)
        for _ in range(count)
    ]


def _with_default_spans(raw: Any) -> Any:
    if not isinstance(raw, dict) or raw.get("spans"):
        return raw
    length = raw.get("length_km")
    if not isinstance(length, (int, float)) or length < 0:
        return raw
    spans = [span.model_dump() for span in default_spans(float(length))]
    return raw | {"spans": spans}


def topology_from_document(content: dict[str, Any]) -> FiberGraph:
    """Builds and validates a fiber graph from a topology mapping.

    Raises:
        IngestError: On parse or validation failure.
    """
    nodes = [
        _parse_entity(NodeSite, raw, "topology", "node", index)
        for index, raw in enumerate(_entities(content, "nodes", "topology"))
    ]
    links = [
        _parse_entity(
            FiberLink, _with_default_spans(raw), "topology", "link", index
        )
        for index, raw in enumerate(_entities(content, "links", "topology"))
    ]
    topology = FiberGraph(nodes=tuple(nodes), links=tuple(links))
    diagnostics = validate_topology(topology)
    if diagnostics:
        raise IngestError("topology: validation failed", diagnostics)
    return topology


def demands_from_document(
    content: dict[str, Any], topology: FiberGraph
) -> list[Demand]:
    """Builds the demand list from a demand mapping.

    Raises:
        IngestError: On parse errors, duplicate ids or unknown
            nodes.
    """
    demands = [
        _parse_entity(Demand, raw, "demands", "demand", index)
        for index, raw in enumerate(_entities(content, "demands", "demands"))
    ]
    diagnostics: list[str] = []
    seen: set[str] = set()
    for demand in demands:
        if demand.id in seen:
            diagnostics.append(f"demand {demand.id}: duplicate id")
        seen.add(demand.id)
        route = demand.explicit_route or ()
        for node_id in dict.fromkeys((demand.src, demand.dst, *route)):
            if not topology.has_node(node_id):
                diagnostics.append(
                    f"demand {demand.id}: unknown node {node_id}"
                )
    if diagnostics:
        raise IngestError("demands: validation failed", diagnostics)
    return demands


def catalog_from_document(content: dict[str, Any]) -> Catalog:
    """Builds the catalog from a catalog mapping.

    Raises:
        IngestError: On parse or validation failure.
    """
    try:
        return Catalog.model_validate(content)
    except ValidationError as err:
        raise IngestError(
            "catalog: invalid catalog", _format_errors(err)
        ) from err


def load_topology(path: str | Path) -> FiberGraph:
    """Loads and validates a topology document.

    Args:
        path (str | Path): Topology file.

    Returns:
        FiberGraph: A graph with no validation diagnostics.

    Raises:
        IngestError: On parse or validation failure.
    """
    return topology_from_document(read_document(path, "topology"))


def load_demands(path: str | Path, topology: FiberGraph) -> list[Demand]:
    """Loads a demand matrix against a loaded topology.

    Args:
        path (str | Path): Demand file.
        topology (FiberGraph): The topology the demands refer to.

    Returns:
        list[Demand]: Demands in file order.

    Raises:
        IngestError: On parse errors or unknown nodes.
    """
    return demands_from_document(read_document(path, "demands"), topology)


def load_catalog(path: str | Path) -> Catalog:
    """Loads an equipment catalog, applying defaults for absent
    planner parameters.

    Args:
        path (str | Path): Catalog file.

    Returns:
        Catalog: The parsed catalog.

    Raises:
        IngestError: On parse or validation failure.
    """
    return catalog_from_document(read_document(path, "catalog"))
