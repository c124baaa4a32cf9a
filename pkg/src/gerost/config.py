"""Configuration management for geometrically robust subspace tracking.

This module provides centralized runtime configuration using Pydantic
settings, supporting environment variables and .env files, together with
the single record of numeric tolerances shared by the library and its tests.
"""

from pathlib import Path
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class NumericTolerances(BaseModel):
    """Numeric tolerances used across the package.

    Every threshold the geometry, inner maximization and tracker rely on is
    defined here once. Tests import the same ``TOLERANCES`` instance.

    Attributes:
        orthonormality: Max Frobenius deviation of ``basisᵀ·basis`` from I.
        horizontality: Max Frobenius norm of ``basisᵀ·direction`` (scaled by
            the direction norm when it exceeds one).
        symmetry: Max absolute asymmetry accepted by the eigensolver.
        rank: Relative singular value cutoff for numerical rank.
        degenerate_gap: Spectral gap below which an eigenspace is flagged.
        gap_floor: Offset of the lower bisection bracket above 2.
        gap_retry: Nudge applied to lambda when the gap degenerates.
        rho_floor: Smallest admissible adaptive radius.
        rho_margin: Distance kept between the adaptive radius and sqrt(k).
        eps_bis: Default bisection tolerance on ``|h|``.
        bisection_max_iter: Safety cap on bisection iterations.
        bisection_width_exponent: Width stop is ``eps_bis * width0 / 2**exp``.
        bisection_margin: Extra iterations allowed over the log2 bound.
        oracle_grad_tol: Gradient norm at which the F* oracle stops.
        oracle_max_iter: Iteration cap of the F* oracle.
        contraction_floor: Steps with ``F_before - F*`` below this are skipped.
        ball_sample_tol: Boundary accuracy of sampled ball points.
    """

    orthonormality: float = 1e-12
    horizontality: float = 1e-10
    symmetry: float = 1e-10
    rank: float = 1e-10
    degenerate_gap: float = 1e-12
    gap_floor: float = 1e-8
    gap_retry: float = 1e-9
    rho_floor: float = 1e-6
    rho_margin: float = 1e-3
    eps_bis: float = 1e-6
    bisection_max_iter: int = 200
    bisection_width_exponent: int = 50
    bisection_margin: int = 15
    oracle_grad_tol: float = 1e-9
    oracle_max_iter: int = 10_000
    contraction_floor: float = 1e-8
    ball_sample_tol: float = 1e-6

    model_config = ConfigDict(frozen=True)


class Settings(BaseSettings):
    """Application settings loaded from environment variables.

    All settings can be overridden via ``GEROST_``-prefixed environment
    variables or a .env file. Environment variables are case-insensitive.

    Attributes:
        output_dir: Default directory for experiment artifacts.
        max_workers: Worker processes for Monte-Carlo seeds (0 = all cores).
        float_digits: Significant digits written to CSV files.
        solver: Eigensolver path for the worst-case subspace.
        lowrank_threshold: Ambient dimension above which ``auto`` picks the
            low-rank eigensolver.
        log_level: Logging level.

    Example:
        >>> from gerost.config import settings
        >>> print(settings.float_digits)
        17
    """

    # Paths
    output_dir: Path = Field(
        default=Path("results"),
        description="Directory for experiment artifacts",
    )

    # Execution
    max_workers: int = Field(
        default=0,
        ge=0,
        description="Worker processes for seeds (0 = available parallelism)",
    )
    float_digits: int = Field(
        default=17,
        ge=1,
        le=17,
        description="Significant digits in CSV output",
    )

    # Numerics
    solver: Literal["auto", "dense", "lowrank"] = Field(
        default="auto",
        description="Eigensolver path for the worst-case subspace",
    )
    lowrank_threshold: int = Field(
        default=64,
        ge=1,
        description="Ambient dimension above which auto uses the low-rank path",
    )

    # Logging
    log_level: Literal["DEBUG", "INFO", "WARNING", "ERROR"] = Field(
        default="INFO",
        description="Logging level",
    )

    model_config = SettingsConfigDict(
        env_prefix="GEROST_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    @property
    def float_format(self) -> str:
        """Return the printf-style float format used for CSV output."""
        return f"%.{self.float_digits}g"


# Global instances
settings = Settings()
TOLERANCES = NumericTolerances()
