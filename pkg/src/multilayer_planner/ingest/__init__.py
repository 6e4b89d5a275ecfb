"""Input document loading."""

from .catalog import (
    Catalog,
    CostEntry,
    DemandOrder,
    ImpairmentConstants,
    PlannerParams,
    SpectrumPolicy,
)
from .loaders import (
    catalog_from_document,
    demands_from_document,
    load_catalog,
    load_demands,
    load_topology,
    topology_from_document,
)
