"""Unit tests for facial keypoint detection package."""
