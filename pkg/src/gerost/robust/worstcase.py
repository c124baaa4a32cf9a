"""Worst-case subspace over a chordal ball on the Grassmannian.

For a current estimate ``Y`` (k-dimensional) and a ball of radius ``rho``
around a nominal d-dimensional subspace ``C``, the inner problem

    max_{W : d_c(W, C) <= rho}  d_c²(Y, W)

is solved through its one-dimensional dual. For ``lam > 2`` the top-d
eigenspace of ``B(lam) = lam P_C - P_Y`` gives a candidate maximizer and the
multiplier is found by bisection on

    h(lam) = d_c(V_d(B(lam)), C) - rho,

which is non-increasing on ``(2, inf)``.
"""

import logging
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Literal

import numpy as np

from gerost.config import TOLERANCES, settings
from gerost.exceptions import DimensionError, DomainError
from gerost.manifold.grassmann import (
    Eigenspace,
    SubspacePoint,
    TangentVector,
    chordal_distance,
    exp_map,
    lowrank_top_eigenspace,
    riemannian_gradient,
    top_eigenspace,
)


if TYPE_CHECKING:
    from numpy.typing import NDArray

_logger = logging.getLogger(__name__)

Solver = Literal["auto", "dense", "lowrank"]


@dataclass(frozen=True, slots=True)
class UncertaintyBall:
    """Chordal ball ``{W : d_c(W, center) <= radius}``.

    Attributes:
        center: Nominal d-dimensional subspace.
        radius: Ball radius, strictly positive.
    """

    center: SubspacePoint
    radius: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.radius) and self.radius > 0.0):
            raise DomainError("radius", self.radius, "must be finite and > 0")


@dataclass(frozen=True, slots=True)
class DualSolution:
    """Result of the multiplier search.

    Attributes:
        lambda_star: Multiplier at which the search stopped.
        active: False when the constraint is inactive (``h <= 0`` already at
            the lower bracket).
        iterations: Number of bisection evaluations.
        residual: ``h(lambda_star)``.
    """

    lambda_star: float
    active: bool
    iterations: int
    residual: float


@dataclass(frozen=True, slots=True)
class WorstCaseSolution:
    """Worst-case subspace and its certificate."""

    maximizer: SubspacePoint
    lambda_star: float
    active: bool
    objective: float
    gap_at_d: float
    bisection_iters: int
    degenerate: bool


@dataclass(frozen=True, slots=True)
class OracleResult:
    """Deep-descent estimate of the robust minimum.

    Attributes:
        value: Smallest robust objective seen.
        iterations: Descent iterations performed.
        grad_norm: Riemannian gradient norm at the last iterate.
        estimate: Last iterate.
    """

    value: float
    iterations: int
    grad_norm: float
    estimate: SubspacePoint


def _resolve_solver(solver: Solver, n: int) -> Literal["dense", "lowrank"]:
    if solver == "auto":
        return "lowrank" if n > settings.lowrank_threshold else "dense"
    return solver


def _check_pair(y: SubspacePoint, ball: UncertaintyBall) -> None:
    if y.ambient_dim != ball.center.ambient_dim:
        raise DimensionError(y.ambient_dim, ball.center.ambient_dim, "ambient dimension")
    k, d, n = y.sub_dim, ball.center.sub_dim, y.ambient_dim
    if k + d > n:
        raise DimensionError(f"k + d <= {n}", k + d, "subspace dimensions")


def build_B(y: SubspacePoint, ball: UncertaintyBall, lam: float) -> "NDArray[np.float64]":
    """Return the dense matrix ``lam P_C - P_Y``.

    Raises:
        DomainError: If ``lam`` is negative.
    """
    if lam < 0.0:
        raise DomainError("lambda", lam, "must be >= 0")
    _check_pair(y, ball)
    return lam * ball.center.projector() - y.projector()


def _top_space(
    y: SubspacePoint,
    ball: UncertaintyBall,
    lam: float,
    solver: Literal["dense", "lowrank"],
) -> Eigenspace:
    d = ball.center.sub_dim

    def solve(value: float) -> Eigenspace:
        if solver == "lowrank":
            return lowrank_top_eigenspace([(value, ball.center), (-1.0, y)], d)
        return top_eigenspace(value * ball.center.projector() - y.projector(), d)

    space = solve(lam)
    if space.degenerate:
        space = solve(lam + TOLERANCES.gap_retry)
        if space.degenerate:
            _logger.warning("Spectral gap stays degenerate at lambda=%.6g", lam)
    return space


def _h_value(
    y: SubspacePoint,
    ball: UncertaintyBall,
    lam: float,
    solver: Literal["dense", "lowrank"],
) -> tuple[float, Eigenspace]:
    space = _top_space(y, ball, lam, solver)
    return chordal_distance(space.basis, ball.center) - ball.radius, space


def h(y: SubspacePoint, ball: UncertaintyBall, lam: float, solver: Solver = "auto") -> float:
    """Evaluate ``d_c(V_d(B(lam)), C) - rho``.

    Raises:
        DomainError: If ``lam <= 2``.
        DimensionError: If the dimensions are incompatible.
    """
    if lam <= 2.0:  # noqa: PLR2004
        raise DomainError("lambda", lam, "must be > 2")
    _check_pair(y, ball)
    value, _ = _h_value(y, ball, lam, _resolve_solver(solver, y.ambient_dim))
    return value


def bisection_bound(k: int, radius: float, eps_bis: float) -> int:
    """Expected evaluation count ``ceil(log2(sqrt(k) / (radius eps_bis)))`` plus margin.

    The bracket ``(2, 2 + sqrt(k) / radius]`` halves with every evaluation.
    """
    width = math.sqrt(k) / radius
    return max(math.ceil(math.log2(width / eps_bis)), 0) + TOLERANCES.bisection_margin


def _bisect(
    y: SubspacePoint,
    ball: UncertaintyBall,
    eps_bis: float,
    solver: Solver,
) -> tuple[DualSolution, Eigenspace]:
    if not eps_bis > 0.0:
        raise DomainError("eps_bis", eps_bis, "must be > 0")
    _check_pair(y, ball)
    path = _resolve_solver(solver, y.ambient_dim)

    lo = 2.0 + TOLERANCES.gap_floor
    hi = 2.0 + math.sqrt(y.sub_dim) / ball.radius
    h_lo, space_lo = _h_value(y, ball, lo, path)
    if h_lo <= 0.0:
        # Inactive constraint: the lower bracket already lies in the ball.
        return DualSolution(lo, active=False, iterations=1, residual=h_lo), space_lo

    h_hi, space_hi = _h_value(y, ball, hi, path)
    evaluations = 2
    if h_hi >= -eps_bis:
        if h_hi > 0.0:
            _logger.debug("Upper bracket not feasible: h=%.3e at lambda=%.6g", h_hi, hi)
        return DualSolution(hi, active=True, iterations=evaluations, residual=h_hi), space_hi

    width_stop = eps_bis * (hi - lo) / 2.0**TOLERANCES.bisection_width_exponent
    best = (hi, h_hi, space_hi)
    for _ in range(TOLERANCES.bisection_max_iter):
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            break
        h_mid, space_mid = _h_value(y, ball, mid, path)
        evaluations += 1
        if abs(h_mid) < abs(best[1]):
            best = (mid, h_mid, space_mid)
        if abs(h_mid) <= eps_bis:
            break
        if h_mid > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= width_stop:
            break

    bound = bisection_bound(y.sub_dim, ball.radius, eps_bis)
    if evaluations > bound:
        _logger.debug("Bisection used %d evaluations, above the bound %d", evaluations, bound)
    lam, residual, space = best
    return DualSolution(lam, active=True, iterations=evaluations, residual=residual), space


def solve_lambda(
    y: SubspacePoint,
    ball: UncertaintyBall,
    eps_bis: float = TOLERANCES.eps_bis,
    solver: Solver = "auto",
) -> DualSolution:
    """Find the multiplier of the worst-case problem by bisection.

    The bracket is ``(2 + gap_floor, 2 + sqrt(k) / rho]``. If ``h`` is
    already non-positive at the lower end the constraint is inactive and
    ``lambda_star`` is reported as the lower end with ``active=False``.

    Args:
        y: Current estimate (k-dimensional).
        ball: Uncertainty ball around the nominal subspace.
        eps_bis: Stop when ``|h| <= eps_bis``.
        solver: Eigensolver path.

    Returns:
        DualSolution.

    Raises:
        DomainError: If ``eps_bis <= 0``.
        DimensionError: If ``k + d > n`` or ambient dimensions differ.
    """
    dual, _ = _bisect(y, ball, eps_bis, solver)
    return dual


def worst_case(
    y: SubspacePoint,
    ball: UncertaintyBall,
    eps_bis: float = TOLERANCES.eps_bis,
    solver: Solver = "auto",
) -> WorstCaseSolution:
    """Compute the worst-case subspace ``V_d(B(lambda_star))``.

    Args:
        y: Current estimate (k-dimensional).
        ball: Uncertainty ball; its radius must be below ``sqrt(k)``.
        eps_bis: Bisection tolerance.
        solver: Eigensolver path.

    Returns:
        WorstCaseSolution with objective ``d_c²(Y, W*)``.

    Raises:
        DomainError: If ``rho >= sqrt(k)`` or ``eps_bis <= 0``.
        DimensionError: If ``k + d > n`` or ambient dimensions differ.

    Example:
        >>> solution = worst_case(estimate, UncertaintyBall(nominal, 0.1))
        >>> solution.objective >= chordal_distance(estimate, nominal) ** 2
        True
    """
    if ball.radius >= math.sqrt(y.sub_dim):
        raise DomainError("radius", ball.radius, f"must be < sqrt({y.sub_dim})")
    dual, space = _bisect(y, ball, eps_bis, solver)
    objective = chordal_distance(y, space.basis) ** 2
    return WorstCaseSolution(
        maximizer=space.basis,
        lambda_star=dual.lambda_star,
        active=dual.active,
        objective=objective,
        gap_at_d=space.gap_at_d,
        bisection_iters=dual.iterations,
        degenerate=space.degenerate,
    )


def robust_objective_F(
    y: SubspacePoint,
    ball: UncertaintyBall,
    eps_bis: float = TOLERANCES.eps_bis,
    solver: Solver = "auto",
) -> float:
    """Return the robust objective ``F(Y) = d_c²(Y, W*)``."""
    return worst_case(y, ball, eps_bis, solver).objective


def robust_gradient(y: SubspacePoint, worst: SubspacePoint) -> TangentVector:
    """Riemannian gradient of ``F`` at ``Y`` for a fixed maximizer.

    By Danskin's theorem the gradient of ``Y -> d_c²(Y, W*)`` is used,
    which is ``-2 (I - P_Y) P_W Y``.
    """
    if worst.ambient_dim != y.ambient_dim:
        raise DimensionError(y.ambient_dim, worst.ambient_dim, "ambient dimension")
    return riemannian_gradient(y, -2.0 * worst.project(y.basis))


def f_star_oracle(
    ball: UncertaintyBall,
    y0: SubspacePoint,
    alpha: float,
    eps_bis: float = TOLERANCES.eps_bis,
    grad_tol: float = TOLERANCES.oracle_grad_tol,
    max_iter: int = TOLERANCES.oracle_max_iter,
    solver: Solver = "auto",
) -> OracleResult:
    """Estimate ``F* = min_Y F(Y)`` by running the descent to convergence.

    Args:
        ball: Uncertainty ball of the step being audited.
        y0: Starting point, usually the estimate before the step.
        alpha: Geodesic step size.
        eps_bis: Bisection tolerance.
        grad_tol: Stop once the gradient norm is at most this value.
        max_iter: Iteration cap.
        solver: Eigensolver path.

    Returns:
        OracleResult with the smallest objective seen.

    Raises:
        DomainError: If ``alpha <= 0``.
    """
    if not alpha > 0.0:
        raise DomainError("alpha", alpha, "must be > 0")
    current = y0
    best = math.inf
    grad_norm = math.inf
    iterations = 0
    for iterations in range(max_iter + 1):
        solution = worst_case(current, ball, eps_bis, solver)
        best = min(best, solution.objective)
        gradient = robust_gradient(current, solution.maximizer)
        grad_norm = gradient.norm
        if grad_norm <= grad_tol or iterations == max_iter:
            break
        current = exp_map(gradient, -alpha)
    if grad_norm > grad_tol:
        _logger.debug("F* oracle stopped at cap with gradient norm %.3e", grad_norm)
    return OracleResult(best, iterations, grad_norm, current)
