"""Inner maximization over a Grassmannian uncertainty ball.

This subpackage solves for the worst-case subspace, its multiplier and the
robust objective together with its Danskin gradient.
"""

from gerost.robust.worstcase import (
    DualSolution,
    OracleResult,
    Solver,
    UncertaintyBall,
    WorstCaseSolution,
    bisection_bound,
    build_B,
    f_star_oracle,
    h,
    robust_gradient,
    robust_objective_F,
    solve_lambda,
    worst_case,
)


__all__ = [
    "DualSolution",
    "OracleResult",
    "Solver",
    "UncertaintyBall",
    "WorstCaseSolution",
    "bisection_bound",
    "build_B",
    "f_star_oracle",
    "h",
    "robust_gradient",
    "robust_objective_F",
    "solve_lambda",
    "worst_case",
]
