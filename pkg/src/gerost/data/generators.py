"""Synthetic video-like streams with a rotating background subspace.

The background at frame t lies in ``U_t = U0 cos θ_t + V0 sin θ_t`` with
``θ_t = amplitude · sin(2π t / period)``, where ``[U0 V0]`` has orthonormal
columns. Each frame is ``U_t w_t + noise`` plus, from a start frame on, a
bright square moving along a random walk. Frame t is a pure function of
the model seed and t.
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import TYPE_CHECKING, Self

import cv2
import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from gerost.exceptions import DimensionError, DomainError
from gerost.manifold.grassmann import SubspacePoint, chordal_distance, orthonormalize


if TYPE_CHECKING:
    from numpy.typing import NDArray

_logger = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True)
class RotatingSubspaceModel:
    """Ground-truth background model.

    Attributes:
        u0: Basis at θ = 0, shape (n, k).
        v0: Rotation target, shape (n, k), orthogonal to ``u0``.
        amplitude: Peak rotation angle in [0, pi/2).
        period: Frames per rotation cycle N.
        coeff_std: Standard deviation of the coefficients ``w_t``.
        noise_std: Standard deviation of the additive noise.
        seed: Seed of the per-frame randomness.
    """

    u0: "NDArray[np.float64]"
    v0: "NDArray[np.float64]"
    amplitude: float
    period: int
    coeff_std: float
    noise_std: float
    seed: int

    def __post_init__(self) -> None:
        if self.u0.shape != self.v0.shape:
            raise DimensionError(self.u0.shape, self.v0.shape, "rotation basis shape")
        joint = np.hstack([self.u0, self.v0])
        deviation = float(np.linalg.norm(joint.T @ joint - np.eye(joint.shape[1])))
        if deviation > 1e-10:  # noqa: PLR2004
            raise DomainError("u0/v0", deviation, "[U0 V0] must have orthonormal columns")
        if not 0.0 <= self.amplitude < math.pi / 2:
            raise DomainError("amplitude", self.amplitude, "must lie in [0, pi/2)")
        if self.period < 1:
            raise DomainError("period", self.period, "must be >= 1")
        if self.coeff_std < 0 or self.noise_std < 0:
            raise DomainError("std", min(self.coeff_std, self.noise_std), "must be >= 0")

    @property
    def n(self) -> int:
        """Ambient dimension."""
        return int(self.u0.shape[0])

    @property
    def k(self) -> int:
        """Background subspace dimension."""
        return int(self.u0.shape[1])

    def theta(self, t: int) -> float:
        """Rotation angle at frame t."""
        return self.amplitude * math.sin(2.0 * math.pi * t / self.period)

    def basis_at(self, t: int) -> "NDArray[np.float64]":
        """Orthonormal basis of ``U_t``."""
        angle = self.theta(t)
        return self.u0 * math.cos(angle) + self.v0 * math.sin(angle)

    def subspace_at(self, t: int) -> SubspacePoint:
        """Ground-truth subspace at frame t."""
        return SubspacePoint(self.basis_at(t))


@dataclass(frozen=True, slots=True)
class OcclusionSpec:
    """Moving square occluder.

    Attributes:
        frame_shape: Frame (height, width); ``n = height · width``.
        start_frame: First occluded frame.
        square_size: Side of the square in pixels.
        intensity: Value added to occluded pixels.
        walk_step: Max per-axis displacement between frames.
        seed: Seed of the random walk.
    """

    frame_shape: tuple[int, int]
    start_frame: int
    square_size: int
    intensity: float
    walk_step: int
    seed: int

    def __post_init__(self) -> None:
        height, width = self.frame_shape
        if not 1 <= self.square_size <= min(height, width):
            raise DomainError("square_size", self.square_size, "must fit inside the frame")
        if self.walk_step < 0:
            raise DomainError("walk_step", self.walk_step, "must be >= 0")

    @property
    def n(self) -> int:
        """Number of pixels."""
        return self.frame_shape[0] * self.frame_shape[1]

    def position_at(self, t: int) -> tuple[int, int] | None:
        """Top-left corner (row, col) at frame t, ``None`` before the start."""
        if t < self.start_frame:
            return None
        return _walk(self, t - self.start_frame + 1)[t - self.start_frame]

    def mask_at(self, t: int) -> "NDArray[np.bool_]":
        """Row-major boolean foreground mask of length n."""
        canvas = np.zeros(self.frame_shape, dtype=np.uint8)
        position = self.position_at(t)
        if position is not None:
            row, col = position
            last = self.square_size - 1
            cv2.rectangle(canvas, (col, row), (col + last, row + last), 1, thickness=cv2.FILLED)
        return canvas.reshape(-1).astype(bool)


@lru_cache(maxsize=64)
def _walk_cached(spec: OcclusionSpec, length: int) -> tuple[tuple[int, int], ...]:
    rng = np.random.default_rng(spec.seed)
    height, width = spec.frame_shape
    limits = np.array([height - spec.square_size, width - spec.square_size])
    position = np.array([rng.integers(0, limits[0] + 1), rng.integers(0, limits[1] + 1)])
    path = [(int(position[0]), int(position[1]))]
    for _ in range(length - 1):
        step = rng.integers(-spec.walk_step, spec.walk_step + 1, size=2)
        position = np.clip(position + step, 0, limits)
        path.append((int(position[0]), int(position[1])))
    return tuple(path)


def _walk(spec: OcclusionSpec, length: int) -> tuple[tuple[int, int], ...]:
    """Random-walk positions; longer walks extend shorter ones."""
    # Round the length up so nearby frames share one cached walk.
    bucket = max(64, 1 << (length - 1).bit_length())
    return _walk_cached(spec, bucket)


@dataclass(frozen=True, slots=True)
class LabeledFrame:
    """One observation with its ground truth."""

    t: int
    observation: "NDArray[np.float64]"
    truth_subspace: SubspacePoint
    foreground_mask: "NDArray[np.bool_]"


@dataclass(frozen=True, slots=True)
class LabeledStream:
    """A contiguous block of labeled frames.

    Attributes:
        times: Frame indices.
        observations: Array (N, n).
        masks: Boolean array (N, n).
        truths: Ground-truth subspaces, one per frame.
    """

    times: "NDArray[np.int64]"
    observations: "NDArray[np.float64]"
    masks: "NDArray[np.bool_]"
    truths: tuple[SubspacePoint, ...]

    def __len__(self) -> int:
        return int(self.times.shape[0])


def make_rotating_model(
    n: int,
    k: int,
    amplitude: float,
    period: int,
    coeff_std: float,
    noise_std: float,
    seed: int,
) -> RotatingSubspaceModel:
    """Draw ``[U0 V0]`` from the QR factor of a seeded Gaussian matrix.

    Raises:
        DimensionError: If ``2k > n``.
    """
    if 2 * k > n:
        raise DimensionError(f"2k <= {n}", 2 * k, "rotation dimension")
    rng = np.random.default_rng(seed)
    joint = orthonormalize(rng.standard_normal((n, 2 * k))).basis
    return RotatingSubspaceModel(
        u0=np.array(joint[:, :k]),
        v0=np.array(joint[:, k:]),
        amplitude=amplitude,
        period=period,
        coeff_std=coeff_std,
        noise_std=noise_std,
        seed=seed,
    )


def frame_at(
    model: RotatingSubspaceModel,
    occlusion: OcclusionSpec | None,
    t: int,
) -> LabeledFrame:
    """Generate frame t.

    Raises:
        DomainError: If ``t < 0``.
        DimensionError: If the occlusion frame size differs from n.
    """
    if t < 0:
        raise DomainError("t", t, "must be >= 0")
    if occlusion is not None and occlusion.n != model.n:
        raise DimensionError(model.n, occlusion.n, "occlusion frame size")

    rng = np.random.default_rng([model.seed, t])
    coefficients = rng.standard_normal(model.k) * model.coeff_std
    noise = rng.standard_normal(model.n) * model.noise_std
    basis = model.basis_at(t)
    observation = basis @ coefficients + noise

    if occlusion is None:
        mask = np.zeros(model.n, dtype=bool)
    else:
        mask = occlusion.mask_at(t)
        observation = observation + occlusion.intensity * mask
    return LabeledFrame(t, observation, SubspacePoint(basis), mask)


def generate_stream(
    model: RotatingSubspaceModel,
    occlusion: OcclusionSpec | None,
    n_frames: int,
    first_frame: int = 1,
) -> LabeledStream:
    """Generate frames ``first_frame .. first_frame + n_frames - 1``."""
    frames = [frame_at(model, occlusion, t) for t in range(first_frame, first_frame + n_frames)]
    _logger.info("Generated %d frames (n=%d, k=%d)", n_frames, model.n, model.k)
    return LabeledStream(
        times=np.array([frame.t for frame in frames], dtype=np.int64),
        observations=np.vstack([frame.observation for frame in frames]),
        masks=np.vstack([frame.foreground_mask for frame in frames]),
        truths=tuple(frame.truth_subspace for frame in frames),
    )


def drift_sequence(model: RotatingSubspaceModel) -> "NDArray[np.float64]":
    """Per-step drift ``d_c(U_t, U_{t+1})`` for ``t = 0 .. period - 1``.

    Entry ``t`` is the step from frame ``t`` to ``t + 1``. Under the angle
    profile ``a sin(2 pi t / N)`` it mirrors entry ``N - 1 - t``, the step
    from frame ``N - 1 - t`` to ``N - t``.
    """
    truths = [model.subspace_at(t) for t in range(model.period + 1)]
    return np.array([chordal_distance(a, b) for a, b in zip(truths, truths[1:], strict=False)])


class GeneratorProfile(BaseModel):
    """Named generator parameters.

    Attributes:
        name: Profile name.
        frame_height: Frame height in pixels.
        frame_width: Frame width in pixels.
        rank: Background subspace dimension k.
        amplitude: Peak rotation angle.
        period: Frames per stream N.
        coeff_std: Coefficient standard deviation.
        noise_std: Noise standard deviation.
        occlusion_start: First occluded frame.
        square_size: Occluder side in pixels.
        intensity: Occluder brightness.
        walk_step: Occluder random-walk step.
    """

    name: str = "custom"
    frame_height: int = Field(ge=1)
    frame_width: int = Field(ge=1)
    rank: int = Field(ge=1)
    amplitude: float = Field(default=0.5, ge=0.0, lt=math.pi / 2)
    period: int = Field(ge=1)
    coeff_std: float = Field(default=1.0, ge=0.0)
    noise_std: float = Field(default=0.01, ge=0.0)
    occlusion_start: int = Field(ge=0)
    square_size: int = Field(ge=1)
    intensity: float = 1.0
    walk_step: int = Field(default=1, ge=0)

    model_config = ConfigDict(frozen=True, extra="forbid")

    @model_validator(mode="before")
    @classmethod
    def _apply_profile(cls, data: object) -> object:
        """Fill unspecified fields from the named built-in profile."""
        if isinstance(data, dict) and data.get("name") in PROFILES:
            base = PROFILES[data["name"]].model_dump()
            base.update(data)
            return base
        return data

    @model_validator(mode="after")
    def _check_geometry(self) -> Self:
        if self.square_size > min(self.frame_height, self.frame_width):
            msg = "square_size must fit inside the frame"
            raise ValueError(msg)
        if 2 * self.rank > self.n:
            msg = "2 * rank must not exceed the number of pixels"
            raise ValueError(msg)
        return self

    @property
    def n(self) -> int:
        """Number of pixels."""
        return self.frame_height * self.frame_width

    def build(self, seed: int) -> tuple[RotatingSubspaceModel, OcclusionSpec]:
        """Instantiate the background model and occluder for a seed."""
        model = make_rotating_model(
            self.n,
            self.rank,
            self.amplitude,
            self.period,
            self.coeff_std,
            self.noise_std,
            seed,
        )
        occlusion = OcclusionSpec(
            frame_shape=(self.frame_height, self.frame_width),
            start_frame=self.occlusion_start,
            square_size=self.square_size,
            intensity=self.intensity,
            walk_step=self.walk_step,
            seed=seed + 1,
        )
        return model, occlusion

    def eps_estimate(self) -> float:
        """Three-sigma bound on the noise norm, ``3 · noise_std · sqrt(n)``."""
        return 3.0 * self.noise_std * math.sqrt(self.n)


PROFILES: dict[str, GeneratorProfile] = {}
PROFILES["desk"] = GeneratorProfile(
    name="desk",
    frame_height=32,
    frame_width=32,
    rank=5,
    amplitude=0.5,
    period=120,
    coeff_std=10.0,
    noise_std=0.01,
    occlusion_start=21,
    square_size=6,
    intensity=5.0,
    walk_step=1,
)
PROFILES["full"] = GeneratorProfile(
    name="full",
    frame_height=64,
    frame_width=64,
    rank=5,
    amplitude=0.5,
    period=300,
    coeff_std=10.0,
    noise_std=0.01,
    occlusion_start=51,
    square_size=10,
    intensity=5.0,
    walk_step=1,
)
