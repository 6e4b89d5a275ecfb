"""This file contains the equipment catalog and the planner
parameters read from the catalog document."""

from enum import Enum
from typing import Any

from pydantic import (
    Field,
    NonNegativeFloat,
    PositiveFloat,
    PositiveInt,
    field_validator,
)

from multilayer_planner.model.exceptions import UnknownEntityError
from multilayer_planner.model.types import (
    AdminWeight,
    Disjointness,
    FrozenModel,
    GridKind,
    GridSpec,
    MarginStack,
    RoadmClass,
    TransponderMode,
)


class SpectrumPolicy(str, Enum):
    """Spectrum assignment policies."""

    FIRST_FIT = "first-fit"
    EXACT_FIT = "exact-fit"


class DemandOrder(str, Enum):
    """Order in which demands are allocated."""

    DESC = "desc"
    ASC = "asc"
    INPUT = "input"


class CostEntry(FrozenModel):
    """Unit cost and power of one equipment kind."""

    cost_units: NonNegativeFloat = 0.0
    power_w: NonNegativeFloat = 0.0


class ImpairmentConstants(FrozenModel):
    """Constants of the per-span OSNR estimate.

    The reference corresponds to 0 dBm launch power at 0.1 nm
    noise bandwidth.
    """

    reference_osnr_db: float = 58.0
    noise_figure_db: float = 6.0


class PlannerParams(FrozenModel):
    """Tunable parameters of the planning heuristics."""

    k_paths: PositiveInt = 3
    k_grooming: PositiveInt = 2
    grooming_threshold: float = 0.5
    disjointness: Disjointness = Disjointness.LINK
    enable_restoration_precompute: bool = False
    admin_weight: AdminWeight = AdminWeight.LENGTH_KM
    spectrum_policy: SpectrumPolicy = SpectrumPolicy.FIRST_FIT
    demand_order: DemandOrder = DemandOrder.DESC
    single_pass: bool = False
    load_split: bool = True
    enable_overbuild: bool = True
    workers: PositiveInt = 1

    @field_validator("grooming_threshold")
    @classmethod
    def _threshold_in_range(cls, value: float) -> float:
        if not 0 < value <= 1:
            raise ValueError(f"threshold out of range (0, 1]: {value}")
        return value


# Equipment kinds priced through the cost table.
AMPLIFIER = "amplifier"
FIBER_KM = "fiber_km"
SHELF = "shelf"
PROTECTION_MODULE = "protection_module"
ROADM_DEGREE = "roadm_degree"


def roadm_degree_kind(roadm_class: RoadmClass) -> str:
    """Cost table key of a ROADM degree of a node class."""
    return f"{ROADM_DEGREE}:{roadm_class.value}"


class Catalog(FrozenModel):
    """Transponder modes, grid, margins, costs and planner
    parameters."""

    modes: tuple[TransponderMode, ...] = Field(
        default=(), validate_default=True
    )
    grid: GridSpec = GridSpec()
    margins: MarginStack = MarginStack()
    cost_table: dict[str, CostEntry] = Field(default_factory=dict)
    planner_params: PlannerParams = PlannerParams()
    impairment: ImpairmentConstants = ImpairmentConstants()
    slots_per_shelf: PositiveInt = 12

    @field_validator("modes", mode="before")
    @classmethod
    def _require_modes(cls, value: Any) -> Any:
        if not value:
            raise ValueError("no transponder modes")
        return value

    @field_validator("modes")
    @classmethod
    def _unique_mode_ids(
        cls, value: tuple[TransponderMode, ...]
    ) -> tuple[TransponderMode, ...]:
        ids = [mode.id for mode in value]
        duplicates = sorted({i for i in ids if ids.count(i) > 1})
        if duplicates:
            raise ValueError(f"duplicate mode ids {duplicates}")
        return value

    @field_validator("cost_table", mode="before")
    @classmethod
    def _flatten_cost_table(cls, value: Any) -> Any:
        """Accepts `roadm_degree: {fixed: {...}, ...}` as well as
        flat `roadm_degree:fixed` keys."""
        if not isinstance(value, dict):
            return value
        flat: dict[str, Any] = {}
        for kind, entry in value.items():
            if kind == ROADM_DEGREE and isinstance(entry, dict):
                if set(entry) <= {"cost_units", "power_w"}:
                    for roadm_class in RoadmClass:
                        flat[roadm_degree_kind(roadm_class)] = entry
                else:
                    for class_name, class_entry in entry.items():
                        flat[f"{ROADM_DEGREE}:{class_name}"] = class_entry
            else:
                flat[kind] = entry
        return flat

    def mode(self, mode_id: str) -> TransponderMode:
        """Looks up a transponder mode.

        Raises:
            UnknownEntityError: If there is no such mode.
        """
        for mode in self.modes:
            if mode.id == mode_id:
                return mode
        raise UnknownEntityError("mode", mode_id)

    def cost(self, kind: str) -> CostEntry:
        """Cost entry of an equipment kind (zero if unpriced)."""
        return self.cost_table.get(kind, CostEntry())

    @property
    def usable_modes(self) -> list[TransponderMode]:
        """Modes that can be placed on the catalog grid."""
        return [mode for mode in self.modes if self.grid.supports(mode)]

    @property
    def max_line_rate_gbps(self) -> float:
        """Highest line rate among the usable modes (0 if none)."""
        return max(
            (mode.line_rate_gbps for mode in self.usable_modes), default=0.0
        )

    def with_overrides(
        self,
        grid_kind: GridKind | None = None,
        **params: Any,
    ) -> "Catalog":
        """Returns a copy with planner parameters (and optionally
        the grid kind) replaced. Parameters set to None are left
        untouched.

        Raises:
            pydantic.ValidationError: If an override is invalid.
        """
        updates = {key: val for key, val in params.items() if val is not None}
        planner_params = PlannerParams.model_validate(
            self.planner_params.model_dump() | updates
        )
        grid = self.grid
        if grid_kind is not None:
            grid = GridSpec.model_validate(
                grid.model_dump() | {"kind": grid_kind}
            )
        return self.model_copy(
            update={"planner_params": planner_params, "grid": grid}
        )


def slots_to_ghz(slots: int, grid: GridSpec) -> PositiveFloat:
    """Spectral width of a number of cells on a grid, GHz."""
    if grid.kind == GridKind.FIXED:
        return slots * grid.channel_spacing_ghz
    return slots * grid.slot_granularity_ghz
