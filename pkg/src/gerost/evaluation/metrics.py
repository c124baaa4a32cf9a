"""Tracking and foreground-detection metrics.

Foreground pixels are scored by the absolute residual of a frame after
projecting out the estimated background subspace. ROC curves are computed
on a fixed grid of score quantiles so that curves from streams of different
resolution are comparable.
"""

import logging
from collections.abc import Sequence
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
from sklearn.metrics import roc_auc_score

from gerost.exceptions import DegenerateLabelsError, DimensionError, InsufficientDataError
from gerost.manifold.grassmann import SubspacePoint, chordal_distance


if TYPE_CHECKING:
    from numpy.typing import NDArray

    from gerost.tracking.tracker import RunHistory

_logger = logging.getLogger(__name__)

SCORE_FUNCTION = "abs_residual"
DEFAULT_THRESHOLDS = 256


@dataclass(frozen=True, slots=True)
class RocCurve:
    """Receiver operating characteristic.

    Attributes:
        thresholds: Descending thresholds, starting at +inf and ending at -inf.
        tpr: True positive rate per threshold.
        fpr: False positive rate per threshold.
        auc: Trapezoidal area under the curve.
    """

    thresholds: "NDArray[np.float64]"
    tpr: "NDArray[np.float64]"
    fpr: "NDArray[np.float64]"
    auc: float


def tracking_error(truth: SubspacePoint, estimate: SubspacePoint) -> float:
    """Chordal distance between the true and the estimated subspace."""
    return chordal_distance(truth, estimate)


def foreground_scores(
    frame: "NDArray[np.float64]",
    estimate: SubspacePoint,
) -> "NDArray[np.float64]":
    """Per-pixel score ``|((I - P_Û) u)_j|``.

    Raises:
        DimensionError: If the frame length differs from the ambient dimension.
    """
    u = np.asarray(frame, dtype=np.float64).reshape(-1)
    if u.shape[0] != estimate.ambient_dim:
        raise DimensionError(estimate.ambient_dim, u.shape[0], "frame length")
    return np.abs(estimate.residual(u))


def _pool(
    scores: "Sequence[NDArray[np.float64]] | NDArray[np.float64]",
    masks: "Sequence[NDArray[np.bool_]] | NDArray[np.bool_]",
) -> tuple["NDArray[np.float64]", "NDArray[np.bool_]"]:
    pooled = np.concatenate([np.ravel(s) for s in scores]).astype(np.float64)
    labels = np.concatenate([np.ravel(m) for m in masks]).astype(bool)
    if pooled.shape != labels.shape:
        raise DimensionError(labels.shape, pooled.shape, "score count")
    positives = int(labels.sum())
    if positives == 0 or positives == labels.size:
        raise DegenerateLabelsError()
    return pooled, labels


def roc(
    scores: "Sequence[NDArray[np.float64]] | NDArray[np.float64]",
    masks: "Sequence[NDArray[np.bool_]] | NDArray[np.bool_]",
    n_thresholds: int = DEFAULT_THRESHOLDS,
) -> RocCurve:
    """ROC curve of pooled per-pixel scores.

    Thresholds are the distinct values among ``n_thresholds`` evenly spaced
    quantiles of the pooled scores (nearest observed score), framed by
    ``+inf`` and ``-inf``. A pixel is predicted foreground when its score is
    at least the threshold.

    Args:
        scores: Per-frame score vectors (or a stacked array).
        masks: Per-frame boolean foreground masks aligned with ``scores``.
        n_thresholds: Number of quantile levels.

    Returns:
        RocCurve.

    Raises:
        DimensionError: If scores and masks differ in size.
        DegenerateLabelsError: If only one class is present.

    Example:
        >>> curve = roc([np.array([0.9, 0.1])], [np.array([True, False])])
        >>> curve.auc
        1.0
    """
    pooled, labels = _pool(scores, masks)
    levels = np.linspace(0.0, 1.0, max(n_thresholds, 2))
    grid = np.unique(np.quantile(pooled, levels, method="nearest"))[::-1]
    thresholds = np.concatenate([[np.inf], grid, [-np.inf]])

    positive = np.sort(pooled[labels])
    negative = np.sort(pooled[~labels])
    true_pos = positive.size - np.searchsorted(positive, thresholds, side="left")
    false_pos = negative.size - np.searchsorted(negative, thresholds, side="left")
    tpr = true_pos / positive.size
    fpr = false_pos / negative.size
    auc = float(np.trapezoid(tpr, fpr))
    return RocCurve(thresholds, tpr.astype(np.float64), fpr.astype(np.float64), auc)


def exact_auc(
    scores: "Sequence[NDArray[np.float64]] | NDArray[np.float64]",
    masks: "Sequence[NDArray[np.bool_]] | NDArray[np.bool_]",
) -> float:
    """Pairwise AUC (ties count one half) over the pooled pixels."""
    pooled, labels = _pool(scores, masks)
    return float(roc_auc_score(labels, pooled))


def steady_state_error(history: "RunHistory", burn_in: int) -> float:
    """Mean tracking error over the steps after the first ``burn_in``.

    Raises:
        InsufficientDataError: If the run has no ground truth or no step
            remains after the burn-in.
    """
    errors = history.tracking_errors()
    if burn_in >= errors.size:
        msg = f"burn_in={burn_in} leaves no steps of {errors.size}"
        raise InsufficientDataError(msg)
    return float(errors[burn_in:].mean())
