"""Elevation-ordering based correction, temporal smoothing and scale transfer
of binary water/land label rasters."""

from .core import (LAND, MISSING, UNKNOWN, WATER, Label, labels_at_level, level_of_labels,
                   ordering_from_elevation)
from .exceptions import FormatError, InconsistentLabelsError, InvalidInputError, OrbitError
from .orbcor import correct_stack, correct_timestep, err_profile, err_profiles, learn_ordering
from .scale import (FusionConfig, FusionResult, MappingGrid, PivotPair, build_mapping_grid,
                    candidate_lsr_ordering, confident_hsr_labels, estimate_wth, fuse,
                    pivot_propagate)
from .temporal import AlphaSweep, CostBreakdown, alpha_sweep, smooth_levels, smooth_stack, suggest_alpha

__version__ = "0.1.0"

__all__ = [
    "LAND", "WATER", "MISSING", "UNKNOWN", "Label",
    "ordering_from_elevation", "labels_at_level", "level_of_labels",
    "OrbitError", "InvalidInputError", "InconsistentLabelsError", "FormatError",
    "err_profile", "err_profiles", "correct_timestep", "correct_stack", "learn_ordering",
    "MappingGrid", "FusionConfig", "FusionResult", "PivotPair", "build_mapping_grid",
    "candidate_lsr_ordering", "estimate_wth", "confident_hsr_labels", "pivot_propagate", "fuse",
    "CostBreakdown", "AlphaSweep", "smooth_levels", "smooth_stack", "alpha_sweep",
    "suggest_alpha",
]
