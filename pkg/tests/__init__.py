"""Tests for facial keypoint detection package."""
