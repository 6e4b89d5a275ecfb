"""Optical layer: impairment evaluation and the spectrum ledger."""

from .impairment import (
    FeasibilityVerdict,
    cascade_osnr_db,
    evaluate_mode,
    filter_modes,
    path_metrics,
    span_osnr_db,
)
from .spectrum import (
    SpectrumState,
    assign_exact_fit,
    assign_first_fit,
    assign_spectrum,
    fragmentation,
    free_runs,
    occupancy,
    overbuild,
)
