"""Metrics, error-bound checks and randomized property suites."""

from gerost.evaluation.bounds import (
    BoundConstants,
    BoundReport,
    bound_constants,
    bound_offset,
    bound_report,
)
from gerost.evaluation.metrics import (
    SCORE_FUNCTION,
    RocCurve,
    exact_auc,
    foreground_scores,
    roc,
    steady_state_error,
    tracking_error,
)
from gerost.evaluation.properties import (
    DEFAULT_TRIALS,
    SUITES,
    PropertyResult,
    SuiteReport,
    run_property_suite,
)


__all__ = [
    "DEFAULT_TRIALS",
    "SCORE_FUNCTION",
    "SUITES",
    "BoundConstants",
    "BoundReport",
    "PropertyResult",
    "RocCurve",
    "SuiteReport",
    "bound_constants",
    "bound_offset",
    "bound_report",
    "exact_auc",
    "foreground_scores",
    "roc",
    "run_property_suite",
    "steady_state_error",
    "tracking_error",
]
