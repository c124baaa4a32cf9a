"""Grassmann and Stiefel manifold primitives.

A point of the Grassmannian Gr(k, n) is stored as an orthonormal basis
``U ∈ St(k, n)``. Bases are not unique, so every comparison between
subspaces goes through projectors ``P = U Uᵀ`` or the chordal distance,
never through the basis entries themselves.
"""

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
from scipy.linalg import eigh, null_space, orth, qr, subspace_angles, svd, svdvals
from scipy.optimize import brentq
from sklearn.utils.extmath import svd_flip

from gerost.config import TOLERANCES
from gerost.exceptions import DimensionError, DomainError, RankDeficiencyError, SymmetryError


if TYPE_CHECKING:
    from numpy.typing import NDArray

_logger = logging.getLogger(__name__)

RandomSeed = int | np.random.Generator | None


def _frozen(array: "NDArray[np.float64]") -> "NDArray[np.float64]":
    """Return a read-only float64 copy of ``array``."""
    out = np.array(array, dtype=np.float64, copy=True)
    out.flags.writeable = False
    return out


@dataclass(frozen=True, slots=True)
class SubspacePoint:
    """A k-dimensional subspace of R^n given by an orthonormal basis.

    Attributes:
        basis: Array of shape (n, k) with orthonormal columns.

    Example:
        >>> point = SubspacePoint(np.eye(3)[:, :2])
        >>> point.ambient_dim, point.sub_dim
        (3, 2)
    """

    basis: "NDArray[np.float64]"

    def __post_init__(self) -> None:
        basis = _frozen(self.basis)
        if basis.ndim != 2:  # noqa: PLR2004
            raise DimensionError("2-D basis", basis.shape, "basis shape")
        n, k = basis.shape
        if not 1 <= k <= n:
            raise DimensionError("1 <= k <= n", (n, k), "subspace dimension")
        deviation = float(np.linalg.norm(basis.T @ basis - np.eye(k)))
        if deviation > TOLERANCES.orthonormality:
            raise DomainError("basis", deviation, "columns are not orthonormal")
        object.__setattr__(self, "basis", basis)

    @property
    def ambient_dim(self) -> int:
        """Return the ambient dimension n."""
        return int(self.basis.shape[0])

    @property
    def sub_dim(self) -> int:
        """Return the subspace dimension k."""
        return int(self.basis.shape[1])

    def projector(self) -> "NDArray[np.float64]":
        """Return the orthogonal projector ``U Uᵀ`` of shape (n, n)."""
        return self.basis @ self.basis.T

    def project(self, x: "NDArray[np.float64]") -> "NDArray[np.float64]":
        """Apply the projector to a vector or matrix without forming it."""
        return self.basis @ (self.basis.T @ x)

    def residual(self, x: "NDArray[np.float64]") -> "NDArray[np.float64]":
        """Apply the complementary projector ``I - U Uᵀ`` to ``x``."""
        return x - self.project(x)


@dataclass(frozen=True, slots=True)
class PrincipalAngleSet:
    """Principal angles between two subspaces.

    Attributes:
        angles: ``min(k, d)`` angles in [0, pi/2], ascending.
        dims: The dimensions (k, d) of the two subspaces.
    """

    angles: "NDArray[np.float64]"
    dims: tuple[int, int]

    def __post_init__(self) -> None:
        angles = _frozen(self.angles)
        if np.any(angles < 0) or np.any(angles > math.pi / 2):
            raise DomainError("angles", float(angles.max(initial=0.0)), "must lie in [0, pi/2]")
        if np.any(np.diff(angles) < 0):
            raise DomainError("angles", float(angles[0]), "must be non-decreasing")
        object.__setattr__(self, "angles", angles)


@dataclass(frozen=True, slots=True)
class TangentVector:
    """A horizontal tangent vector at a Grassmannian point.

    Attributes:
        at: Base point.
        direction: Array of shape (n, k) with ``at.basisᵀ · direction = 0``.
    """

    at: SubspacePoint
    direction: "NDArray[np.float64]"

    def __post_init__(self) -> None:
        direction = _frozen(self.direction)
        if direction.shape != self.at.basis.shape:
            raise DimensionError(self.at.basis.shape, direction.shape, "tangent shape")
        scale = max(1.0, float(np.linalg.norm(direction)))
        vertical = float(np.linalg.norm(self.at.basis.T @ direction))
        if vertical > TOLERANCES.horizontality * scale:
            raise DomainError("direction", vertical, "tangent vector is not horizontal")
        object.__setattr__(self, "direction", direction)

    @property
    def norm(self) -> float:
        """Return the Frobenius norm of the direction."""
        return float(np.linalg.norm(self.direction))


@dataclass(frozen=True, slots=True)
class Eigenspace:
    """Top-d eigenspace of a symmetric matrix.

    Attributes:
        basis: Subspace spanned by the top-d eigenvectors.
        eigenvalues: Full spectrum, sorted descending.
        gap_at_d: Spectral gap ``mu_d - mu_{d+1}``.
        degenerate: True when the gap is below the degenerate-gap tolerance.
    """

    basis: SubspacePoint
    eigenvalues: "NDArray[np.float64]"
    gap_at_d: float
    degenerate: bool


def _check_ambient(a: SubspacePoint, b: SubspacePoint) -> None:
    if a.ambient_dim != b.ambient_dim:
        raise DimensionError(a.ambient_dim, b.ambient_dim, "ambient dimension")


def orthonormalize(raw: "NDArray[np.float64]") -> SubspacePoint:
    """Return an orthonormal basis for the column space of ``raw``.

    Args:
        raw: Array of shape (n, k) with full column rank, k <= n. A 1-D
            array is treated as a single column.

    Returns:
        SubspacePoint spanning the same column space.

    Raises:
        DimensionError: If k > n or the input is empty.
        RankDeficiencyError: If the numerical rank is below k.

    Example:
        >>> point = orthonormalize(np.array([[2.0, 0.0], [0.0, 3.0], [0.0, 0.0]]))
        >>> np.allclose(point.basis, np.eye(3)[:, :2])
        True
    """
    matrix = np.asarray(raw, dtype=np.float64)
    if matrix.ndim == 1:
        matrix = matrix[:, np.newaxis]
    n, k = matrix.shape
    if not 1 <= k <= n:
        raise DimensionError("1 <= k <= n", (n, k), "matrix shape")

    singular = svdvals(matrix)
    rank = int(np.sum(singular > TOLERANCES.rank * singular[0])) if singular[0] > 0 else 0
    if rank < k:
        raise RankDeficiencyError(rank, k)

    q, r = qr(matrix, mode="economic")
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    return SubspacePoint(q * signs)


def projector_distance(a: SubspacePoint, b: SubspacePoint) -> float:
    """Return ``‖P_A - P_B‖_F`` without forming the projectors.

    Uses ``‖P_A - P_B‖_F² = ‖P_B^⊥ A‖_F² + ‖P_A^⊥ B‖_F²``, which stays
    accurate when the subspaces nearly coincide.
    """
    _check_ambient(a, b)
    left = np.linalg.norm(b.residual(a.basis))
    right = np.linalg.norm(a.residual(b.basis))
    return float(math.hypot(left, right))


def principal_angles(a: SubspacePoint, b: SubspacePoint) -> PrincipalAngleSet:
    """Compute the principal angles between two subspaces.

    The angles are the arccosines of the singular values of ``Aᵀ B``; the
    sine/cosine formulation in ``scipy.linalg.subspace_angles`` keeps small
    angles accurate.

    Raises:
        DimensionError: If the ambient dimensions differ.
    """
    _check_ambient(a, b)
    angles = np.sort(subspace_angles(a.basis, b.basis))
    return PrincipalAngleSet(np.clip(angles, 0.0, math.pi / 2), (a.sub_dim, b.sub_dim))


def chordal_distance(a: SubspacePoint, b: SubspacePoint) -> float:
    """Chordal distance ``(|k - d| + Σ sin² θ_i)^{1/2}``.

    ``Σ sin² θ_i`` is evaluated as ``‖P_big^⊥ · small‖_F²``, whose singular
    values are exactly the sines of the principal angles.

    Raises:
        DimensionError: If the ambient dimensions differ.
    """
    _check_ambient(a, b)
    small, big = (a, b) if a.sub_dim <= b.sub_dim else (b, a)
    sines_sq = float(np.sum(big.residual(small.basis) ** 2))
    return math.sqrt(abs(a.sub_dim - b.sub_dim) + sines_sq)


def _select_top(
    values: "NDArray[np.float64]",
    vectors: "NDArray[np.float64]",
    d: int,
) -> Eigenspace:
    """Build an Eigenspace from an ascending eigendecomposition."""
    order = np.argsort(values, kind="stable")[::-1]
    values = values[order]
    top = np.array(vectors[:, order[:d]], copy=True)
    top, _ = svd_flip(top, top.T.copy(), u_based_decision=True)

    gap = float(values[d - 1] - values[d])
    degenerate = gap < TOLERANCES.degenerate_gap
    if degenerate:
        _logger.debug("Degenerate spectral gap %.3e at index %d", gap, d)
    return Eigenspace(SubspacePoint(top), _frozen(values), gap, degenerate)


def top_eigenspace(matrix: "NDArray[np.float64]", d: int) -> Eigenspace:
    """Return the top-d eigenspace of a symmetric matrix.

    Args:
        matrix: Symmetric array of shape (n, n).
        d: Number of leading eigenvectors, 1 <= d <= n - 1.

    Returns:
        Eigenspace with the full descending spectrum and the gap at d. A gap
        below the degenerate-gap tolerance is flagged, not raised.

    Raises:
        DimensionError: If the matrix is not square.
        DomainError: If d is out of range.
        SymmetryError: If the matrix is not symmetric.

    Example:
        >>> space = top_eigenspace(np.diag([3.0, 2.0, 1.0]), 2)
        >>> space.gap_at_d
        1.0
    """
    m = np.asarray(matrix, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:  # noqa: PLR2004
        raise DimensionError("square matrix", m.shape, "matrix shape")
    n = m.shape[0]
    if not 1 <= d <= n - 1:
        raise DomainError("d", d, f"must satisfy 1 <= d <= {n - 1}")
    asymmetry = float(np.max(np.abs(m - m.T)))
    if asymmetry > TOLERANCES.symmetry:
        raise SymmetryError(asymmetry)

    values, vectors = eigh(0.5 * (m + m.T))
    return _select_top(values, vectors, d)


def lowrank_top_eigenspace(
    terms: Sequence[tuple[float, SubspacePoint]],
    d: int,
) -> Eigenspace:
    """Top-d eigenspace of ``Σ w_i P_{S_i}`` on the span of the ``S_i``.

    The matrix vanishes on the orthogonal complement of the combined basis,
    so the eigenproblem reduces to an r×r Gram problem with r <= Σ dim S_i.
    The implicit zero eigenvalues are appended to the reported spectrum.

    Args:
        terms: Pairs (weight, subspace) sharing one ambient dimension.
        d: Number of leading eigenvectors, 1 <= d <= n - 1.

    Returns:
        Eigenspace matching ``top_eigenspace`` on the dense matrix.

    Raises:
        DimensionError: If terms are empty or ambient dimensions differ.
        DomainError: If d is out of range.
    """
    if not terms:
        raise DimensionError("at least one term", 0, "term count")
    first = terms[0][1]
    for _, space in terms[1:]:
        _check_ambient(first, space)
    n = first.ambient_dim
    if not 1 <= d <= n - 1:
        raise DomainError("d", d, f"must satisfy 1 <= d <= {n - 1}")

    combined = orth(np.hstack([space.basis for _, space in terms]), rcond=TOLERANCES.rank)
    r = combined.shape[1]
    gram = np.zeros((r, r))
    for weight, space in terms:
        coords = combined.T @ space.basis
        gram += weight * (coords @ coords.T)
    values_r, vectors_r = eigh(0.5 * (gram + gram.T))

    values = np.concatenate([values_r, np.zeros(n - r)])
    lifted = combined @ vectors_r
    if n > r:
        # Only materialize the complement when zero eigenvalues reach the top d.
        needed = d - int(np.sum(values_r > 0.0))
        if needed > 0:
            complement = null_space(combined.T)[:, : n - r]
            lifted = np.hstack([lifted, complement])
        else:
            lifted = np.hstack([lifted, np.zeros((n, n - r))])
    return _select_top(values, lifted, d)


def riemannian_gradient(
    y: SubspacePoint,
    euclid_grad: "NDArray[np.float64]",
) -> TangentVector:
    """Project a Euclidean gradient onto the horizontal space at ``y``.

    Returns:
        TangentVector with direction ``(I - Y Yᵀ) · euclid_grad``.

    Raises:
        DimensionError: If the gradient shape differs from the basis shape.
    """
    grad = np.asarray(euclid_grad, dtype=np.float64)
    if grad.shape != y.basis.shape:
        raise DimensionError(y.basis.shape, grad.shape, "gradient shape")
    return TangentVector(y, y.residual(grad))


def exp_map(v: TangentVector, step: float) -> SubspacePoint:
    """Follow the Grassmannian geodesic from ``v.at`` along ``v``.

    With the thin SVD ``direction = Q Σ Vᵀ`` the geodesic is
    ``Y V cos(step Σ) Vᵀ + Q sin(step Σ) Vᵀ``; the result is
    re-orthonormalized.

    Args:
        v: Horizontal tangent vector.
        step: Geodesic step length (negative values walk backwards).

    Returns:
        The subspace reached after ``step``.
    """
    if step == 0.0:
        return v.at
    q, sigma, vt = svd(v.direction, full_matrices=False)
    if not np.any(sigma):
        return v.at
    angles = step * sigma
    moved = ((v.at.basis @ vt.T) * np.cos(angles)) @ vt + (q * np.sin(angles)) @ vt
    return orthonormalize(moved)


def _random_direction(
    center: SubspacePoint,
    rng: np.random.Generator,
) -> tuple["NDArray[np.float64]", "NDArray[np.float64]", "NDArray[np.float64]"]:
    """Draw a Gaussian horizontal direction and return its thin SVD."""
    raw = rng.standard_normal(center.basis.shape)
    q, sigma, vt = svd(center.residual(raw), full_matrices=False)
    rank = int(np.sum(sigma > TOLERANCES.rank * sigma[0]))
    return q[:, :rank], sigma[:rank] / sigma[0], vt[:rank]


def sample_ball_boundary(
    center: SubspacePoint,
    radius: float,
    rng_seed: RandomSeed = None,
) -> SubspacePoint:
    """Sample a subspace at chordal distance ``radius`` from ``center``.

    A random horizontal direction is drawn at ``center`` and the geodesic
    step is solved with Brent's method so that ``d_c`` hits the radius.

    Args:
        center: Ball center.
        radius: Target chordal distance, 0 < radius < sqrt(center.sub_dim).
        rng_seed: Seed or generator.

    Returns:
        SubspacePoint with ``|d_c(result, center) - radius| <= ball_sample_tol``.

    Raises:
        DomainError: If the radius is out of range or unreachable in R^n, or if
            the root finder misses the boundary.
    """
    k = center.sub_dim
    if not 0.0 < radius < math.sqrt(k):
        raise DomainError("radius", radius, f"must lie in (0, sqrt({k}))")
    rng = np.random.default_rng(rng_seed)
    q, sigma, vt = _random_direction(center, rng)

    half_pi = math.pi / 2
    reach = math.sqrt(float(np.sum(np.sin(half_pi * sigma) ** 2)))
    if reach <= radius:
        sigma = np.ones_like(sigma)
        reach = math.sqrt(sigma.size)
        if reach <= radius:
            raise DomainError("radius", radius, f"exceeds reachable distance {reach:.6f}")

    tangent = TangentVector(center, (q * sigma) @ vt)

    def offset(step: float) -> float:
        return chordal_distance(exp_map(tangent, step), center) - radius

    step = brentq(offset, 0.0, half_pi, xtol=1e-15, maxiter=200)
    sample = exp_map(tangent, step)
    miss = abs(chordal_distance(sample, center) - radius)
    if miss > TOLERANCES.ball_sample_tol:
        raise DomainError("radius", radius, f"boundary sample missed by {miss:.3e}")
    return sample


def sample_ball_interior(
    center: SubspacePoint,
    radius: float,
    rng_seed: RandomSeed = None,
) -> SubspacePoint:
    """Sample a subspace inside the chordal ball by scaling the radius.

    Raises:
        DomainError: If the radius is out of range.
    """
    k = center.sub_dim
    if not 0.0 < radius < math.sqrt(k):
        raise DomainError("radius", radius, f"must lie in (0, sqrt({k}))")
    rng = np.random.default_rng(rng_seed)
    scaled = radius * (1.0 - rng.random())
    return sample_ball_boundary(center, scaled, rng)
