"""Unit tests for tracking and detection metrics."""

import math

import numpy as np
import pytest

from gerost.evaluation.metrics import (
    exact_auc,
    foreground_scores,
    roc,
    steady_state_error,
    tracking_error,
)
from gerost.exceptions import DegenerateLabelsError, DimensionError, InsufficientDataError
from gerost.tracking.tracker import track_stream


class TestForegroundScores:
    """Tests for foreground_scores and tracking_error."""

    def test_absolute_residual(self, coordinate_subspace) -> None:
        """Test the residual of a frame against span(e1)."""
        scores = foreground_scores(np.array([1.0, 2.0, -3.0]), coordinate_subspace(3, [0]))
        assert np.allclose(scores, [0.0, 2.0, 3.0])

    def test_frame_length_mismatch_raises(self, coordinate_subspace) -> None:
        """Test that the frame must have ambient length."""
        with pytest.raises(DimensionError):
            foreground_scores(np.ones(4), coordinate_subspace(3, [0]))

    def test_tracking_error_is_chordal(self, coordinate_subspace) -> None:
        """Test the tracking error of orthogonal planes."""
        error = tracking_error(coordinate_subspace(4, [0, 1]), coordinate_subspace(4, [2, 3]))
        assert error == pytest.approx(math.sqrt(2.0))


class TestRoc:
    """Tests for roc and exact_auc."""

    def test_perfect_separation(self) -> None:
        """Test the two-pixel example."""
        curve = roc([np.array([0.9, 0.1])], [np.array([True, False])])
        assert curve.auc == pytest.approx(1.0)

    def test_inverted_scores(self) -> None:
        """Test that inverted scores give zero area."""
        curve = roc([np.array([0.1, 0.9])], [np.array([True, False])])
        assert curve.auc == pytest.approx(0.0)

    def test_curve_endpoints(self, rng) -> None:
        """Test that the curve runs from (0, 0) to (1, 1) monotonically."""
        scores = rng.random(50)
        labels = rng.random(50) < 0.3
        labels[:2] = [True, False]
        curve = roc(scores, labels)
        assert curve.thresholds[0] == np.inf
        assert curve.thresholds[-1] == -np.inf
        assert (curve.tpr[0], curve.fpr[0]) == (0.0, 0.0)
        assert (curve.tpr[-1], curve.fpr[-1]) == (1.0, 1.0)
        assert np.all(np.diff(curve.tpr) >= 0.0)
        assert np.all(np.diff(curve.fpr) >= 0.0)

    def test_fine_grid_matches_exact_auc(self, rng) -> None:
        """Test that a grid containing every score reproduces the pairwise AUC."""
        scores = [rng.random(5), rng.random(5)]
        masks = [np.array([True, False, True, False, False])] * 2
        assert roc(scores, masks).auc == pytest.approx(exact_auc(scores, masks))

    def test_quantile_grid_close_to_exact_auc(self, rng) -> None:
        """Test the 256-level grid against the pairwise AUC on 1e4 pixels."""
        labels = rng.random(10_000) < 0.1
        scores = rng.standard_normal(10_000) + 1.5 * labels
        curve = roc(scores, labels, n_thresholds=256)
        assert curve.thresholds.size <= 256 + 2
        assert abs(curve.auc - exact_auc(scores, labels)) <= 2e-3

    def test_coarse_grid_dedupes_thresholds(self, rng) -> None:
        """Test that the grid never exceeds the requested size."""
        scores = rng.random(1000)
        labels = np.arange(1000) % 7 == 0
        curve = roc(scores, labels, n_thresholds=16)
        assert curve.thresholds.size <= 16 + 2

    def test_single_class_raises(self) -> None:
        """Test that all-background labels are rejected."""
        with pytest.raises(DegenerateLabelsError):
            roc([np.array([0.3, 0.4])], [np.array([False, False])])

    def test_size_mismatch_raises(self) -> None:
        """Test that scores and masks must align."""
        with pytest.raises(DimensionError):
            exact_auc([np.array([0.3, 0.4, 0.5])], [np.array([True, False])])

    def test_exact_auc_counts_ties_half(self) -> None:
        """Test that a tied pair contributes one half."""
        assert exact_auc(np.array([0.5, 0.5]), np.array([True, False])) == pytest.approx(0.5)


class TestSteadyStateError:
    """Tests for steady_state_error."""

    def test_mean_after_burn_in(self, small_config, small_stream) -> None:
        """Test the mean of the post burn-in tracking errors."""
        samples, truths = small_stream
        history = track_stream(small_config, samples, truths)
        errors = history.tracking_errors()
        assert steady_state_error(history, 5) == pytest.approx(errors[5:].mean())

    def test_burn_in_too_long_raises(self, small_config, small_stream) -> None:
        """Test that a burn-in covering the run is rejected."""
        samples, truths = small_stream
        history = track_stream(small_config, samples, truths)
        with pytest.raises(InsufficientDataError):
            steady_state_error(history, len(history.records))
