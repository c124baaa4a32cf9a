"""Shared test fixtures for subspace tracking tests.

This module provides common fixtures used across unit and integration tests.
"""

from collections.abc import Callable
from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np
import pytest

from gerost.data.generators import RotatingSubspaceModel, make_rotating_model
from gerost.manifold.grassmann import SubspacePoint, orthonormalize
from gerost.tracking.config import FixedRadius, TrackerConfig


if TYPE_CHECKING:
    from numpy.typing import NDArray


@pytest.fixture
def project_root() -> Path:
    """Return project root directory."""
    return Path(__file__).parent.parent


@pytest.fixture
def rng() -> np.random.Generator:
    """Return a seeded random generator."""
    return np.random.default_rng(42)


@pytest.fixture
def random_subspace() -> Callable[[int, int, int], SubspacePoint]:
    """Return a factory ``(n, k, seed) -> SubspacePoint`` of Gaussian subspaces."""

    def make(n: int, k: int, seed: int = 0) -> SubspacePoint:
        generator = np.random.default_rng(seed)
        return orthonormalize(generator.standard_normal((n, k)))

    return make


@pytest.fixture
def coordinate_subspace() -> Callable[[int, list[int]], SubspacePoint]:
    """Return a factory spanning the given coordinate axes of R^n."""

    def make(n: int, axes: list[int]) -> SubspacePoint:
        return SubspacePoint(np.eye(n)[:, axes])

    return make


@pytest.fixture
def small_config() -> TrackerConfig:
    """Small robust tracker configuration with a fixed radius.

    Returns:
        TrackerConfig with n=20, k=2, d=3, T=5, K=2.
    """
    return TrackerConfig(
        n=20,
        k=2,
        d=3,
        window_length=5,
        inner_iterations=2,
        alpha=0.25,
        radius=FixedRadius(rho=0.05),
    )


@pytest.fixture
def small_model() -> RotatingSubspaceModel:
    """Slowly rotating rank-2 background in R^20."""
    return make_rotating_model(
        n=20,
        k=2,
        amplitude=0.3,
        period=40,
        coeff_std=1.0,
        noise_std=0.01,
        seed=3,
    )


@pytest.fixture
def small_stream(small_model: RotatingSubspaceModel) -> tuple[
    "NDArray[np.float64]",
    list[SubspacePoint],
]:
    """Observations (30 × 20) and truths of the small model, frames 1..30."""
    rng = np.random.default_rng(7)
    times = range(1, 31)
    truths = [small_model.subspace_at(t) for t in times]
    samples = np.vstack(
        [truth.basis @ rng.standard_normal(2) + 0.01 * rng.standard_normal(20) for truth in truths]
    )
    return samples, truths


@pytest.fixture
def write_config(tmp_path: Path) -> Callable[[str], Path]:
    """Return a helper writing TOML text to a temporary file."""

    def write(text: str, name: str = "experiment.toml") -> Path:
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return path

    return write
