"""Streaming subspace trackers.

Both trackers keep a sliding window of the last T samples. Once the window
is full the nominal subspace ``Ŵ_t`` is its top-d left singular subspace and
the estimate takes K geodesic descent steps:

* ``gerost`` descends the worst case ``max_{W : d_c(W, Ŵ_t) <= rho_t}``;
* ``great`` descends ``d_c²(Y, Ŵ_t)`` directly.

The functional core (``gerost_step``, ``great_step``) maps an immutable
state to a new state. ``SubspaceTracker`` wraps it for callers that prefer
an object.
"""

import logging
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING, Any, NamedTuple

import numpy as np
from scipy.linalg import svd, svdvals

from gerost.config import TOLERANCES
from gerost.exceptions import ConfigError, DimensionError, InsufficientDataError
from gerost.manifold.grassmann import (
    SubspacePoint,
    chordal_distance,
    exp_map,
    orthonormalize,
)
from gerost.robust.worstcase import (
    UncertaintyBall,
    f_star_oracle,
    robust_gradient,
    worst_case,
)
from gerost.tracking.config import AdaptiveRadius, TrackerConfig


if TYPE_CHECKING:
    from numpy.typing import NDArray

_logger = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True)
class StepDiagnostics:
    """Per-step record of one descent step.

    Attributes:
        t: Time index of the sample that triggered the step.
        rho_t: Radius used (0 for the nominal tracker).
        lambda_star: Multiplier from the last inner iteration, ``None`` for
            the nominal tracker.
        lambda_active: Whether the ball constraint was active.
        p_bar_t: Noise-to-signal ratio (adaptive policy only).
        eta_t: Perturbation bound (adaptive policy only).
        f_trace: Objective before each inner iteration and after the last.
        grad_norms: Gradient norm at each inner iteration.
        bisection_iters: Bisection evaluations summed over inner iterations.
        nominal_degenerate: True when the window had rank below d.
        tracking_error: ``d_c(U_t, Û_t)`` when ground truth is known.
    """

    t: int
    rho_t: float
    lambda_star: float | None
    lambda_active: bool
    p_bar_t: float | None
    eta_t: float | None
    f_trace: tuple[float, ...]
    grad_norms: tuple[float, ...]
    bisection_iters: int
    nominal_degenerate: bool
    tracking_error: float | None = None

    @property
    def f_before(self) -> float:
        """Objective before the first inner iteration."""
        return self.f_trace[0]

    @property
    def f_after(self) -> float:
        """Objective after the last inner iteration."""
        return self.f_trace[-1]

    def as_record(self) -> dict[str, Any]:
        """Flatten to a CSV-friendly mapping."""
        return {
            "t": self.t,
            "tracking_error": self.tracking_error,
            "rho_t": self.rho_t,
            "lambda_star": self.lambda_star,
            "lambda_active": self.lambda_active,
            "p_bar_t": self.p_bar_t,
            "eta_t": self.eta_t,
            "f_before": self.f_before,
            "f_after": self.f_after,
            "grad_norm_first": self.grad_norms[0],
            "grad_norm_last": self.grad_norms[-1],
            "bisection_iters": self.bisection_iters,
            "nominal_degenerate": self.nominal_degenerate,
        }


@dataclass(frozen=True, slots=True)
class TrackerState:
    """Immutable tracker state.

    Attributes:
        window: Buffered samples, shape (n, m) with m <= T, oldest first.
        estimate: Current estimate ``Û_t``, ``None`` until initialized.
        t: Number of samples consumed.
        nominal: Nominal subspace of the last full window.
        last_diagnostics: Diagnostics of the most recent descent step.
    """

    window: "NDArray[np.float64]"
    estimate: SubspacePoint | None = None
    t: int = 0
    nominal: SubspacePoint | None = None
    last_diagnostics: StepDiagnostics | None = None

    @classmethod
    def empty(cls, n: int, estimate: SubspacePoint | None = None) -> "TrackerState":
        """Return a state with an empty window."""
        return cls(window=np.empty((n, 0)), estimate=estimate)


class RadiusEstimate(NamedTuple):
    """Radius chosen for one step."""

    rho: float
    eta: float | None
    p_bar: float | None


@dataclass(frozen=True, slots=True)
class StepRecord:
    """One descent step of a run, with the subspaces needed for auditing."""

    diagnostics: StepDiagnostics
    prior: SubspacePoint
    estimate: SubspacePoint
    nominal: SubspacePoint


@dataclass
class RunHistory:
    """History of a tracker over a stream.

    Attributes:
        config: Tracker configuration.
        t0: Time index of the estimate the first step started from.
        initial_error: ``d_c(U_{t0}, Û_{t0})`` when ground truth is known.
        records: One record per descent step, in time order.
    """

    config: TrackerConfig
    t0: int | None = None
    initial_error: float | None = None
    records: list[StepRecord] = field(default_factory=list)

    @property
    def steps(self) -> list[StepDiagnostics]:
        """Return the diagnostics of every step."""
        return [record.diagnostics for record in self.records]

    def tracking_errors(self) -> "NDArray[np.float64]":
        """Return per-step tracking errors.

        Raises:
            InsufficientDataError: If ground truth was not supplied.
        """
        errors = [step.tracking_error for step in self.steps]
        if not errors or any(error is None for error in errors):
            msg = "Run has no ground-truth tracking errors"
            raise InsufficientDataError(msg)
        return np.asarray(errors, dtype=np.float64)


def slide_window(
    window: "NDArray[np.float64]",
    sample: "NDArray[np.float64]",
    length: int,
) -> "NDArray[np.float64]":
    """Append ``sample`` as the newest column, keeping at most ``length``."""
    stacked = np.column_stack([window, sample])
    return stacked[:, -length:]


def _complete_basis(found: "NDArray[np.float64]", d: int) -> "NDArray[np.float64]":
    """Extend orthonormal columns to d columns with coordinate directions."""
    n = found.shape[0]
    columns = [found[:, j] for j in range(found.shape[1])]
    for j in range(n):
        if len(columns) == d:
            break
        candidate = np.zeros(n)
        candidate[j] = 1.0
        for _ in range(2):
            for column in columns:
                candidate -= column * (column @ candidate)
        norm = np.linalg.norm(candidate)
        if norm > 0.5:  # noqa: PLR2004
            columns.append(candidate / norm)
    return np.column_stack(columns)


def nominal_subspace(window: "NDArray[np.float64]", d: int) -> tuple[SubspacePoint, bool]:
    """Top-d left singular subspace of the window.

    If the window has numerical rank below d the subspace is completed with
    coordinate directions orthogonal to the range, in index order, and the
    degenerate flag is set.

    Returns:
        Tuple of (nominal subspace, degenerate flag).
    """
    left, singular, _ = svd(window, full_matrices=False)
    rank = 0
    if singular.size and singular[0] > 0.0:
        rank = int(np.sum(singular > TOLERANCES.rank * singular[0]))
    if rank >= d:
        return SubspacePoint(left[:, :d]), False

    _logger.warning("Window rank %d below nominal dimension %d; completing basis", rank, d)
    return SubspacePoint(_complete_basis(left[:, :rank], d)), True


def initial_estimate(nominal: SubspacePoint, k: int, seed: int) -> SubspacePoint:
    """Seeded random k-dimensional subspace of the nominal subspace."""
    rng = np.random.default_rng(seed)
    mixing = orthonormalize(rng.standard_normal((nominal.sub_dim, k)))
    return SubspacePoint(nominal.basis @ mixing.basis)


def adaptive_radius(
    window: "NDArray[np.float64]",
    previous: SubspacePoint | None,
    cfg: TrackerConfig,
) -> RadiusEstimate:
    """Compute ``(rho_t, eta_t, p_bar_t)`` for the adaptive policy.

    Args:
        window: Current window ``W_t`` (n × T), oldest sample first.
        previous: Estimate ``Û_{t-1}``, used when ``sigma_lower`` is unset.
        cfg: Tracker configuration with an adaptive radius policy.

    Returns:
        RadiusEstimate.

    Raises:
        ConfigError: If the policy is not adaptive or ``p_bar >= 1``.
    """
    policy = cfg.radius
    if not isinstance(policy, AdaptiveRadius):
        msg = "adaptive_radius needs an adaptive radius policy"
        raise ConfigError(msg, field="radius")

    length = window.shape[1]
    weights = np.arange(length - 1, -1, -1, dtype=np.float64)
    eta = policy.mu_est * float(np.linalg.norm(window * weights)) + policy.eps_est * math.sqrt(
        length
    ) * (policy.mu_est * (length - 1) + 1.0)

    sigma = policy.sigma_lower
    if sigma is None:
        projected = window if previous is None else previous.basis.T @ window
        values = svdvals(projected)
        sigma = float(values[cfg.k - 1]) if values.size >= cfg.k else 0.0
    p_bar = eta / sigma if sigma > 0.0 else math.inf
    if policy.p_cap is not None:
        p_bar = min(p_bar, policy.p_cap)
    if p_bar >= 1.0:
        msg = f"noise-to-signal ratio {p_bar:.4g} >= 1; set p_cap < 1"
        raise ConfigError(msg, field="radius.p_cap")

    rho = math.sqrt(2.0) * p_bar / (1.0 - p_bar)
    if policy.include_dk_term:
        rho += math.sqrt(cfg.d - cfg.k)
    rho = min(max(rho, policy.rho_floor), math.sqrt(cfg.k) - policy.rho_margin)
    return RadiusEstimate(rho, eta, p_bar)


def _radius(
    window: "NDArray[np.float64]",
    previous: SubspacePoint | None,
    cfg: TrackerConfig,
) -> RadiusEstimate:
    if isinstance(cfg.radius, AdaptiveRadius):
        return adaptive_radius(window, previous, cfg)
    return RadiusEstimate(cfg.radius.rho, None, None)


def _as_sample(sample: "NDArray[np.float64]", n: int) -> "NDArray[np.float64]":
    vector = np.asarray(sample, dtype=np.float64).reshape(-1)
    if vector.shape[0] != n:
        raise DimensionError(n, vector.shape[0], "sample length")
    return vector


def _advance(
    state: TrackerState,
    sample: "NDArray[np.float64]",
    cfg: TrackerConfig,
) -> TrackerState:
    """Consume one sample and take a descent step when the window is full."""
    window = slide_window(state.window, _as_sample(sample, cfg.n), cfg.window_length)
    t = state.t + 1
    if window.shape[1] < cfg.window_length:
        return replace(state, window=window, t=t)

    nominal, degenerate = nominal_subspace(window, cfg.d)
    if state.estimate is None:
        estimate = initial_estimate(nominal, cfg.k, cfg.seed)
        _logger.debug("Initialized estimate from window at t=%d", t)
        return replace(state, window=window, t=t, estimate=estimate, nominal=nominal)

    robust = cfg.mode == "gerost"
    radius = _radius(window, state.estimate, cfg) if robust else RadiusEstimate(0.0, None, None)
    ball = UncertaintyBall(nominal, radius.rho) if robust else None

    current = state.estimate
    f_trace: list[float] = []
    grad_norms: list[float] = []
    lambda_star: float | None = None
    active = False
    iterations = 0
    for _ in range(cfg.inner_iterations):
        if ball is not None:
            solution = worst_case(current, ball, cfg.eps_bis, cfg.solver)
            worst, objective = solution.maximizer, solution.objective
            lambda_star, active = solution.lambda_star, solution.active
            iterations += solution.bisection_iters
        else:
            worst, objective = nominal, chordal_distance(current, nominal) ** 2
        gradient = robust_gradient(current, worst)
        f_trace.append(objective)
        grad_norms.append(gradient.norm)
        current = exp_map(gradient, -cfg.alpha)

    if ball is not None:
        f_trace.append(worst_case(current, ball, cfg.eps_bis, cfg.solver).objective)
    else:
        f_trace.append(chordal_distance(current, nominal) ** 2)

    diagnostics = StepDiagnostics(
        t=t,
        rho_t=radius.rho,
        lambda_star=lambda_star,
        lambda_active=active,
        p_bar_t=radius.p_bar,
        eta_t=radius.eta,
        f_trace=tuple(f_trace),
        grad_norms=tuple(grad_norms),
        bisection_iters=iterations,
        nominal_degenerate=degenerate,
    )
    return TrackerState(
        window=window,
        estimate=current,
        t=t,
        nominal=nominal,
        last_diagnostics=diagnostics,
    )


def gerost_step(
    state: TrackerState,
    sample: "NDArray[np.float64]",
    cfg: TrackerConfig,
) -> TrackerState:
    """Advance the robust tracker by one sample.

    Raises:
        ConfigError: If ``cfg.mode`` is not ``gerost``.
        DimensionError: If the sample length differs from n.
    """
    if cfg.mode != "gerost":
        msg = f"gerost_step called with mode '{cfg.mode}'"
        raise ConfigError(msg, field="mode")
    return _advance(state, sample, cfg)


def great_step(
    state: TrackerState,
    sample: "NDArray[np.float64]",
    cfg: TrackerConfig,
) -> TrackerState:
    """Advance the nominal tracker by one sample.

    Raises:
        ConfigError: If ``cfg.mode`` is not ``great``.
        DimensionError: If the sample length differs from n.
    """
    if cfg.mode != "great":
        msg = f"great_step called with mode '{cfg.mode}'"
        raise ConfigError(msg, field="mode")
    return _advance(state, sample, cfg)


class SubspaceTracker:
    """Stateful wrapper around the functional tracker steps.

    Example:
        >>> tracker = SubspaceTracker(TrackerConfig(n=32, k=2, d=3, window_length=5))
        >>> diagnostics = tracker.step(sample)  # None while warming up
    """

    def __init__(self, config: TrackerConfig, initial: SubspacePoint | None = None) -> None:
        """Initialize the tracker.

        Args:
            config: Tracker configuration.
            initial: Optional starting estimate; otherwise the estimate is
                drawn inside the first full-window nominal subspace.

        Raises:
            DimensionError: If ``initial`` has the wrong shape.
        """
        if initial is not None and initial.basis.shape != (config.n, config.k):
            raise DimensionError((config.n, config.k), initial.basis.shape, "initial estimate")
        self._config = config
        self._state = TrackerState.empty(config.n, initial)
        self._step = gerost_step if config.mode == "gerost" else great_step

    @property
    def config(self) -> TrackerConfig:
        """Return the tracker configuration."""
        return self._config

    @property
    def state(self) -> TrackerState:
        """Return the current immutable state."""
        return self._state

    @property
    def estimate(self) -> SubspacePoint | None:
        """Return the current estimate."""
        return self._state.estimate

    def step(self, sample: "NDArray[np.float64]") -> StepDiagnostics | None:
        """Consume one sample.

        Returns:
            Diagnostics of the descent step, or ``None`` while the window
            is filling or the estimate is being initialized.
        """
        self._state = self._step(self._state, sample, self._config)
        diagnostics = self._state.last_diagnostics
        if diagnostics is not None and diagnostics.t == self._state.t:
            return diagnostics
        return None


def track_stream(
    cfg: TrackerConfig,
    samples: Iterable["NDArray[np.float64]"],
    truths: Sequence[SubspacePoint] | None = None,
    initial: SubspacePoint | None = None,
) -> RunHistory:
    """Run a tracker over a whole stream.

    Args:
        cfg: Tracker configuration.
        samples: Observations in time order (rows of an N × n array work).
        truths: Optional ground-truth subspaces aligned with ``samples``.
        initial: Optional starting estimate.

    Returns:
        RunHistory with one record per descent step.
    """
    tracker = SubspaceTracker(cfg, initial)
    history = RunHistory(config=cfg)
    previous_truth: SubspacePoint | None = None

    for index, sample in enumerate(samples):
        prior = tracker.estimate
        diagnostics = tracker.step(sample)
        truth = truths[index] if truths is not None else None

        if diagnostics is None:
            if prior is None and tracker.estimate is not None:
                history.t0 = tracker.state.t
                if truth is not None:
                    history.initial_error = chordal_distance(truth, tracker.estimate)
            previous_truth = truth
            continue

        if history.t0 is None and prior is not None:
            history.t0 = diagnostics.t - 1
            if previous_truth is not None:
                history.initial_error = chordal_distance(previous_truth, prior)

        estimate = tracker.estimate
        nominal = tracker.state.nominal
        if estimate is None or nominal is None or prior is None:
            msg = "Descent step without an estimate"
            raise InsufficientDataError(msg)
        if truth is not None:
            diagnostics = replace(diagnostics, tracking_error=chordal_distance(truth, estimate))
        history.records.append(StepRecord(diagnostics, prior, estimate, nominal))
        previous_truth = truth

    _logger.info(
        "Tracked %d steps (%s, n=%d, k=%d, d=%d)",
        len(history.records),
        cfg.mode,
        cfg.n,
        cfg.k,
        cfg.d,
    )
    return history


def oracle_f_star(history: RunHistory, max_iter: int = TOLERANCES.oracle_max_iter) -> list[float]:
    """Estimate ``F*_t`` for every step of a robust run.

    Each step's ball is rebuilt from its recorded nominal subspace and
    radius, and the descent is run from the step's prior estimate.

    Raises:
        ConfigError: If the run used the nominal tracker.
    """
    cfg = history.config
    if cfg.mode != "gerost":
        msg = "F* oracle needs a robust run"
        raise ConfigError(msg, field="mode")
    values = []
    for record in history.records:
        ball = UncertaintyBall(record.nominal, record.diagnostics.rho_t)
        result = f_star_oracle(
            ball,
            record.prior,
            cfg.alpha,
            cfg.eps_bis,
            max_iter=max_iter,
            solver=cfg.solver,
        )
        values.append(result.value)
    return values


def contraction_estimate(
    steps: Sequence[StepDiagnostics],
    f_star: Sequence[float],
    floor: float = TOLERANCES.contraction_floor,
) -> float:
    """Largest per-step contraction ``(F_after - F*) / (F_before - F*)``.

    Steps whose optimality gap before the update is below ``floor`` are
    excluded.

    Raises:
        DimensionError: If the sequences differ in length.
        InsufficientDataError: If every step is excluded.
    """
    if len(steps) != len(f_star):
        raise DimensionError(len(steps), len(f_star), "F* sequence length")
    before = np.array([step.f_before for step in steps], dtype=np.float64)
    after = np.array([step.f_after for step in steps], dtype=np.float64)
    optimum = np.asarray(f_star, dtype=np.float64)

    gaps = before - optimum
    usable = gaps >= floor
    if not np.any(usable):
        msg = "No step has an optimality gap above the floor"
        raise InsufficientDataError(msg)
    ratios = (after[usable] - optimum[usable]) / gaps[usable]
    return float(np.max(ratios))
