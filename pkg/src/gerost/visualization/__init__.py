"""Visualization utilities.

This subpackage renders tracking error, ROC curves, the evolution of the
radius and dual multiplier, and background/foreground snapshots to image
files.
"""

from gerost.visualization.plotting import (
    plot_foreground_snapshot,
    plot_radius_multiplier,
    plot_roc,
    plot_tracking_error,
    save_figure,
)


__all__ = [
    "plot_foreground_snapshot",
    "plot_radius_multiplier",
    "plot_roc",
    "plot_tracking_error",
    "save_figure",
]
