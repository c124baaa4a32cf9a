"""Streaming subspace trackers.

This subpackage provides the robust tracker, the nominal baseline, their
configuration and run histories.
"""

from gerost.tracking.config import AdaptiveRadius, FixedRadius, RadiusPolicy, TrackerConfig
from gerost.tracking.tracker import (
    RadiusEstimate,
    RunHistory,
    StepDiagnostics,
    StepRecord,
    SubspaceTracker,
    TrackerState,
    adaptive_radius,
    contraction_estimate,
    gerost_step,
    great_step,
    initial_estimate,
    nominal_subspace,
    oracle_f_star,
    slide_window,
    track_stream,
)


__all__ = [
    "AdaptiveRadius",
    "FixedRadius",
    "RadiusEstimate",
    "RadiusPolicy",
    "RunHistory",
    "StepDiagnostics",
    "StepRecord",
    "SubspaceTracker",
    "TrackerConfig",
    "TrackerState",
    "adaptive_radius",
    "contraction_estimate",
    "gerost_step",
    "great_step",
    "initial_estimate",
    "nominal_subspace",
    "oracle_f_star",
    "slide_window",
    "track_stream",
]
