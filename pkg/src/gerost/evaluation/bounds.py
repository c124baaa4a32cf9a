"""Empirical check of the worst-case tracking error bound.

For a contraction factor ``β`` the tracking error is bounded by

    d_c(U_t, Û_t) <= (√β)^{t - t0} d_c(U_t0, Û_t0)
                     + C1 μ + C2 √2 p / (1 - p) + C3 ρ + C4 √(d - k)

with ``C1 = √β / (1 - √β)``, ``C2 = 1 / (1 - √β)``,
``C3 = (2√β + √(1 - β)) / (1 - √β)`` and ``C4 = (1 + √(1 - β)) / (1 - √β)``.
``p`` and ``ρ`` enter through their suprema over the run.
"""

import logging
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from gerost.exceptions import DomainError, InsufficientDataError


if TYPE_CHECKING:
    from numpy.typing import NDArray

    from gerost.tracking.tracker import RunHistory

_logger = logging.getLogger(__name__)

VIOLATION_SLACK = 1e-12


@dataclass(frozen=True, slots=True)
class BoundConstants:
    """Constants of the error bound for one contraction factor."""

    beta: float
    c1: float
    c2: float
    c3: float
    c4: float


def bound_constants(beta: float) -> BoundConstants:
    """Evaluate C1..C4 for ``beta`` in [0, 1).

    Raises:
        DomainError: If ``beta`` is outside [0, 1).

    Example:
        >>> constants = bound_constants(0.0)
        >>> (constants.c1, constants.c2, constants.c3, constants.c4)
        (0.0, 1.0, 1.0, 2.0)
    """
    if not 0.0 <= beta < 1.0:
        raise DomainError("beta", beta, "must lie in [0, 1)")
    root = math.sqrt(beta)
    complement = math.sqrt(1.0 - beta)
    scale = 1.0 / (1.0 - root)
    return BoundConstants(
        beta=beta,
        c1=root * scale,
        c2=scale,
        c3=(2.0 * root + complement) * scale,
        c4=(1.0 + complement) * scale,
    )


def bound_offset(
    constants: BoundConstants,
    mu: float,
    p: float,
    rho: float,
    d_minus_k: int,
) -> float:
    """Steady-state part of the bound (everything but the transient).

    Raises:
        DomainError: If ``p`` is outside [0, 1).
    """
    if not 0.0 <= p < 1.0:
        raise DomainError("p", p, "must lie in [0, 1)")
    return (
        constants.c1 * mu
        + constants.c2 * math.sqrt(2.0) * p / (1.0 - p)
        + constants.c3 * rho
        + constants.c4 * math.sqrt(d_minus_k)
    )


@dataclass(frozen=True, slots=True)
class BoundReport:
    """Per-step comparison of the measured error with the bound.

    Attributes:
        t: Step time indices.
        tracking_error: Measured ``d_c(U_t, Û_t)``.
        transient: ``(√β)^{t - t0} d_c(U_t0, Û_t0)``.
        p_hat: Per-step noise-to-signal ratio.
        rho: Per-step radius.
        rhs: Bound value per step.
        violations: True where the measured error exceeds the bound.
        constants: Bound constants.
        mu_hat: Drift estimate used.
        p_sup: Supremum of ``p_hat``.
        rho_sup: Supremum of ``rho``.
        sqrt_dk: ``√(d - k)``.
    """

    t: "NDArray[np.int64]"
    tracking_error: "NDArray[np.float64]"
    transient: "NDArray[np.float64]"
    p_hat: "NDArray[np.float64]"
    rho: "NDArray[np.float64]"
    rhs: "NDArray[np.float64]"
    violations: "NDArray[np.bool_]"
    constants: BoundConstants
    mu_hat: float
    p_sup: float
    rho_sup: float
    sqrt_dk: float

    @property
    def n_violations(self) -> int:
        """Number of steps violating the bound."""
        return int(self.violations.sum())


def bound_report(history: "RunHistory", beta_hat: float, mu_hat: float) -> BoundReport:
    """Evaluate the bound along a robust run with ground truth.

    Args:
        history: Run history of an adaptive-radius tracker with truths.
        beta_hat: Empirical contraction factor in [0, 1).
        mu_hat: Drift estimate (e.g. the maximum per-step drift).

    Returns:
        BoundReport.

    Raises:
        DomainError: If ``beta_hat`` or the noise-to-signal ratio is outside [0, 1).
        InsufficientDataError: If the run lacks truths or ratio estimates.
    """
    constants = bound_constants(beta_hat)
    steps = history.steps
    if not steps or history.t0 is None or history.initial_error is None:
        msg = "Bound report needs a run with ground truth"
        raise InsufficientDataError(msg)
    if any(step.p_bar_t is None for step in steps):
        msg = "Bound report needs adaptive-radius diagnostics"
        raise InsufficientDataError(msg)

    errors = history.tracking_errors()
    times = np.array([step.t for step in steps], dtype=np.int64)
    p_hat = np.array([step.p_bar_t for step in steps], dtype=np.float64)
    rho = np.array([step.rho_t for step in steps], dtype=np.float64)
    cfg = history.config

    p_sup, rho_sup = float(p_hat.max()), float(rho.max())
    offset = bound_offset(constants, mu_hat, p_sup, rho_sup, cfg.d - cfg.k)
    transient = math.sqrt(beta_hat) ** (times - history.t0) * history.initial_error
    rhs = transient + offset
    violations = errors > rhs + VIOLATION_SLACK
    if violations.any():
        _logger.warning(
            "Error bound violated at %d of %d steps (beta_hat=%.4f)",
            int(violations.sum()),
            violations.size,
            beta_hat,
        )
    return BoundReport(
        t=times,
        tracking_error=errors,
        transient=transient,
        p_hat=p_hat,
        rho=rho,
        rhs=rhs,
        violations=violations,
        constants=constants,
        mu_hat=mu_hat,
        p_sup=p_sup,
        rho_sup=rho_sup,
        sqrt_dk=math.sqrt(cfg.d - cfg.k),
    )
