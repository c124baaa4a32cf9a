"""Figures of experiment results.

Figures are built with the object-oriented Matplotlib API and written to
files only; no interactive backend is involved, so plotting is safe inside
worker processes.
"""

import logging
from collections.abc import Mapping
from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np
from matplotlib.figure import Figure

from gerost.exceptions import DimensionError, OutputError


if TYPE_CHECKING:
    import pandas as pd
    from matplotlib.axes import Axes
    from numpy.typing import NDArray

_logger = logging.getLogger(__name__)

_FIGSIZE = (7.0, 4.0)
_DPI = 120


def _new_axes(ax: "Axes | None", figsize: tuple[float, float] = _FIGSIZE) -> "Axes":
    if ax is not None:
        return ax
    return Figure(figsize=figsize).add_subplot()


def save_figure(target: "Axes | Figure", path: Path | str) -> Path:
    """Write a figure, or the figure owning axes, to ``path`` (format from the suffix).

    Raises:
        OutputError: If the file cannot be written.
    """
    path = Path(path)
    figure = target if isinstance(target, Figure) else target.get_figure()
    if figure is None:
        raise OutputError(str(path), "Axes are not attached to a figure")
    try:
        figure.savefig(path, dpi=_DPI, bbox_inches="tight")
    except OSError as e:
        raise OutputError(str(path), f"Failed to write figure: {e}") from e
    _logger.debug("Figure written to %s", path)
    return path


def plot_tracking_error(
    metrics: "Mapping[str, pd.DataFrame]",
    ax: "Axes | None" = None,
    title: str | None = "Tracking error",
) -> "Axes":
    """Plot ``d_c(U_t, Û_t)`` over time, one line per tracker.

    Args:
        metrics: Per-tracker metric tables with ``t`` and ``tracking_error``.
        ax: Axes to draw on; a new figure is created when omitted.
        title: Optional title.

    Returns:
        The Axes drawn on.

    Example:
        >>> ax = plot_tracking_error({"gerost": outcome.metrics})
        >>> save_figure(ax, "tracking_error.png")
    """
    ax = _new_axes(ax)
    for name, table in metrics.items():
        ax.plot(table["t"], table["tracking_error"], label=name, linewidth=1.2)
    ax.set_xlabel("frame t")
    ax.set_ylabel("chordal distance to truth")
    ax.set_yscale("log")
    ax.grid(visible=True, alpha=0.3)
    ax.legend()
    if title:
        ax.set_title(title)
    return ax


def plot_roc(
    curves: "Mapping[str, pd.DataFrame]",
    ax: "Axes | None" = None,
    title: str | None = "Foreground detection ROC",
) -> "Axes":
    """Plot ROC curves (``fpr``/``tpr`` columns), with the AUC in the legend."""
    ax = _new_axes(ax, figsize=(5.0, 5.0))
    for name, table in curves.items():
        auc = float(np.trapezoid(table["tpr"], table["fpr"]))
        ax.plot(table["fpr"], table["tpr"], label=f"{name} (AUC = {auc:.3f})")
    ax.plot([0.0, 1.0], [0.0, 1.0], color="grey", linestyle=":", linewidth=0.8)
    ax.set_xlim(0.0, 1.0)
    ax.set_ylim(0.0, 1.0)
    ax.set_xlabel("false positive rate")
    ax.set_ylabel("true positive rate")
    ax.legend(loc="lower right")
    if title:
        ax.set_title(title)
    return ax


def plot_radius_multiplier(
    diagnostics: "pd.DataFrame",
    occlusion_start: int | None = None,
    ax: "Axes | None" = None,
    title: str | None = "Radius and dual multiplier",
) -> "Axes":
    """Plot ``rho_t`` and ``lambda*`` of a robust run on twin axes.

    A dashed vertical line marks the first occluded frame when given.
    """
    ax = _new_axes(ax)
    ax.plot(diagnostics["t"], diagnostics["rho_t"], color="tab:blue", label="rho_t")
    ax.set_xlabel("frame t")
    ax.set_ylabel("rho_t", color="tab:blue")

    twin = ax.twinx()
    twin.plot(
        diagnostics["t"],
        diagnostics["lambda_star"].astype(float),
        color="tab:red",
        label="lambda*",
    )
    twin.set_ylabel("lambda*", color="tab:red")

    if occlusion_start is not None:
        ax.axvline(occlusion_start, color="black", linestyle="--", linewidth=0.8)
    if title:
        ax.set_title(title)
    return ax


def plot_foreground_snapshot(
    frame: "NDArray[np.float64]",
    background: "NDArray[np.float64]",
    residual: "NDArray[np.float64]",
    shape: tuple[int, int],
    title: str | None = None,
) -> Figure:
    """Show a frame next to its background estimate and foreground residual.

    Args:
        frame: Vectorized frame of length ``height * width``.
        background: Projection of the frame onto the estimated subspace.
        residual: ``frame - background``; shown as magnitude.
        shape: Frame (height, width).
        title: Optional figure title.

    Returns:
        Figure with three image panels.

    Raises:
        DimensionError: If a vector does not match ``shape``.
    """
    panels = {"frame": frame, "background": background, "|residual|": np.abs(residual)}
    size = shape[0] * shape[1]
    for name, values in panels.items():
        if values.size != size:
            raise DimensionError(size, values.size, f"snapshot {name}")

    figure = Figure(figsize=(9.0, 3.2))
    axes = figure.subplots(1, 3)
    low, high = float(np.min(frame)), float(np.max(frame))
    for ax, (name, values) in zip(axes, panels.items(), strict=True):
        image = values.reshape(shape)
        if name == "|residual|":
            shown = ax.imshow(image, cmap="magma")
            figure.colorbar(shown, ax=ax, fraction=0.046)
        else:
            ax.imshow(image, cmap="gray", vmin=low, vmax=high)
        ax.set_title(name)
        ax.set_axis_off()
    if title:
        figure.suptitle(title)
    return figure
