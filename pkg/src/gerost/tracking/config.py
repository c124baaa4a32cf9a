"""Tracker configuration models.

Tracker parameters are validated once, at construction, with Pydantic. The
radius policy is a tagged union selected by its ``policy`` field.
"""

import math
from typing import Annotated, Literal, Self

from pydantic import BaseModel, ConfigDict, Field, model_validator

from gerost.config import TOLERANCES, settings


class FixedRadius(BaseModel):
    """Constant uncertainty radius.

    Attributes:
        rho: Ball radius used at every step.
    """

    policy: Literal["fixed"] = "fixed"
    rho: float = Field(gt=0.0, description="Chordal ball radius")

    model_config = ConfigDict(frozen=True, extra="forbid")


class AdaptiveRadius(BaseModel):
    """Radius derived from drift and noise estimates.

    ``eta_t = mu_est ‖W_t D‖_F + eps_est sqrt(T) (mu_est (T - 1) + 1)`` with
    ``D = diag(T-1, ..., 0)``; ``p_bar = min(eta_t / sigma_lower, p_cap)``
    and ``rho = sqrt(2) p_bar / (1 - p_bar)`` (plus ``sqrt(d - k)`` when
    ``include_dk_term``), clamped to ``[rho_floor, sqrt(k) - rho_margin]``.

    Attributes:
        mu_est: Upper estimate of the per-step drift.
        eps_est: Upper estimate of the noise norm.
        sigma_lower: Lower bound on the k-th signal singular value of the
            window. ``None`` estimates it online from the previous estimate.
        p_cap: Optional cap on the noise-to-signal ratio.
        include_dk_term: Add ``sqrt(d - k)`` to the radius.
        rho_floor: Smallest admissible radius.
        rho_margin: Margin kept below ``sqrt(k)``.
    """

    policy: Literal["adaptive"] = "adaptive"
    mu_est: float = Field(default=0.0, ge=0.0)
    eps_est: float = Field(default=0.0, ge=0.0)
    sigma_lower: float | None = Field(default=None, gt=0.0)
    p_cap: float | None = Field(default=None, gt=0.0, lt=1.0)
    include_dk_term: bool = False
    rho_floor: float = Field(default=TOLERANCES.rho_floor, gt=0.0)
    rho_margin: float = Field(default=TOLERANCES.rho_margin, gt=0.0)

    model_config = ConfigDict(frozen=True, extra="forbid")


RadiusPolicy = Annotated[FixedRadius | AdaptiveRadius, Field(discriminator="policy")]


class TrackerConfig(BaseModel):
    """Parameters of one robust (or nominal) subspace tracker.

    Attributes:
        n: Ambient dimension.
        k: Tracked subspace dimension.
        d: Nominal subspace dimension, ``k <= d`` and ``k + d <= n``.
        window_length: Sliding window length T, at least d.
        inner_iterations: Geodesic descent iterations K per sample.
        alpha: Geodesic step size.
        eps_bis: Bisection tolerance of the inner maximization.
        radius: Radius policy.
        mode: ``gerost`` (robust) or ``great`` (nominal baseline).
        solver: Eigensolver path (defaults to the runtime setting).
        seed: Seed of the warm-start initialization.

    Example:
        >>> cfg = TrackerConfig(n=32, k=3, d=4, window_length=6)
        >>> cfg.radius.policy
        'fixed'
    """

    n: int = Field(ge=2)
    k: int = Field(ge=1)
    d: int = Field(ge=1)
    window_length: int = Field(ge=1)
    inner_iterations: int = Field(default=1, ge=1)
    alpha: float = Field(default=0.25, gt=0.0)
    eps_bis: float = Field(default=TOLERANCES.eps_bis, gt=0.0)
    radius: RadiusPolicy = Field(default_factory=lambda: FixedRadius(rho=0.1))
    mode: Literal["gerost", "great"] = "gerost"
    solver: Literal["auto", "dense", "lowrank"] = Field(default_factory=lambda: settings.solver)
    seed: int = 0

    model_config = ConfigDict(frozen=True, extra="forbid")

    @model_validator(mode="after")
    def _check_dimensions(self) -> Self:
        if self.k > self.d:
            msg = f"k={self.k} must not exceed d={self.d}"
            raise ValueError(msg)
        if self.k + self.d > self.n:
            msg = f"k + d = {self.k + self.d} must not exceed n={self.n}"
            raise ValueError(msg)
        if self.window_length < self.d:
            msg = f"window_length={self.window_length} must be >= d={self.d}"
            raise ValueError(msg)
        if isinstance(self.radius, FixedRadius) and self.radius.rho >= math.sqrt(self.k):
            msg = f"fixed radius {self.radius.rho} must be < sqrt(k)"
            raise ValueError(msg)
        return self
