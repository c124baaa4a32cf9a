"""
Geometrically robust online subspace tracking.

This package tracks a slowly drifting low-dimensional subspace from a
stream of noisy observations by minimizing, at every step, the worst-case
chordal distance over a Grassmannian ball around a nominal subspace
estimated from a sliding window.

Example:
    >>> from gerost.tracking import SubspaceTracker, TrackerConfig
    >>> tracker = SubspaceTracker(TrackerConfig(n=64, k=3, d=4, window_length=8))
    >>> for sample in stream:
    ...     diagnostics = tracker.step(sample)
"""

__version__ = "1.0.0"
__author__ = "L. Petrov"

from gerost.config import settings


__all__ = ["__version__", "settings"]
