"""Randomized property suites for the geometry, solver and tracker.

Each suite draws seeded random instances, checks one or more inequalities
and reports, per property, the number of trials, the number of failures and
the worst margin (slack of the inequality; negative means violated).

Suites:
    geometry      metric axioms, projector identities, exp-map orthonormality,
                  eigensolver agreement
    spectral-gap  gap of ``lam P_C - P_Y`` and eigenspace perturbation bound
    inner-max     boundary activity and dominance over sampled ball points
    gradient      analytic gradient against central finite differences
    descent       monotone objective along inner iterations
    pl            gradient-dominance inequality along a run
    bound         contraction factor and error-bound violations
"""

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass, field, replace

import numpy as np

from gerost.data.generators import (
    LabeledStream,
    RotatingSubspaceModel,
    drift_sequence,
    generate_stream,
    make_rotating_model,
)
from gerost.evaluation.bounds import bound_report
from gerost.exceptions import InsufficientDataError, UnknownSuiteError
from gerost.manifold.grassmann import (
    SubspacePoint,
    TangentVector,
    chordal_distance,
    exp_map,
    lowrank_top_eigenspace,
    orthonormalize,
    projector_distance,
    sample_ball_boundary,
    sample_ball_interior,
    top_eigenspace,
)
from gerost.robust.worstcase import UncertaintyBall, robust_gradient, worst_case
from gerost.tracking.config import AdaptiveRadius, FixedRadius, TrackerConfig
from gerost.tracking.tracker import RunHistory, contraction_estimate, oracle_f_star, track_stream


_logger = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True)
class PropertyResult:
    """Outcome of one property over all trials of a suite."""

    suite: str
    name: str
    trials: int
    failures: int
    worst_margin: float
    note: str = ""

    @property
    def passed(self) -> bool:
        """True when no trial failed."""
        return self.failures == 0


@dataclass(frozen=True, slots=True)
class SuiteReport:
    """All property results of one suite run."""

    suite: str
    results: tuple[PropertyResult, ...]
    note: str = ""

    @property
    def passed(self) -> bool:
        """True when every property passed."""
        return all(result.passed for result in self.results)

    @property
    def total_failures(self) -> int:
        """Failures summed over properties."""
        return sum(result.failures for result in self.results)


@dataclass
class _Tally:
    suite: str
    name: str
    margins: list[float] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    def add(self, margin: float) -> None:
        self.margins.append(float(margin))

    def result(self) -> PropertyResult:
        failures = sum(1 for margin in self.margins if not margin >= 0.0)
        worst = min(self.margins) if self.margins else math.inf
        return PropertyResult(
            self.suite,
            self.name,
            len(self.margins),
            failures,
            worst,
            "; ".join(self.notes),
        )


def _random_subspace(rng: np.random.Generator, n: int, k: int) -> SubspacePoint:
    return orthonormalize(rng.standard_normal((n, k)))


def _random_dims(rng: np.random.Generator, n_min: int, n_max: int) -> tuple[int, int, int]:
    """Draw (n, k, d) with 1 <= k <= d and k + d <= n."""
    n = int(rng.integers(n_min, n_max + 1))
    k = int(rng.integers(1, n // 2 + 1))
    d = int(rng.integers(k, n - k + 1))
    return n, k, d


def _unit_tangent(rng: np.random.Generator, at: SubspacePoint) -> TangentVector:
    direction = at.residual(rng.standard_normal(at.basis.shape))
    return TangentVector(at, direction / np.linalg.norm(direction))


def geometry_suite(trials: int, rng: np.random.Generator) -> list[PropertyResult]:
    """Metric axioms, projector identities and eigensolver agreement."""
    suite = "geometry"
    symmetry = _Tally(suite, "chordal-symmetry")
    triangle = _Tally(suite, "chordal-triangle")
    frobenius = _Tally(suite, "chordal-frobenius")
    idempotent = _Tally(suite, "projector-idempotent")
    exp_orth = _Tally(suite, "exp-map-orthonormal")
    eig = _Tally(suite, "eigensolver-brute-force")
    lowrank = _Tally(suite, "eigensolver-lowrank")

    for _ in range(trials):
        n = int(rng.integers(4, 31))
        k = int(rng.integers(1, n // 2 + 1))
        a, b, c = (_random_subspace(rng, n, k) for _ in range(3))
        ab, ba = chordal_distance(a, b), chordal_distance(b, a)
        symmetry.add(1e-12 - abs(ab - ba))
        triangle.add(ab + chordal_distance(b, c) + 1e-9 - chordal_distance(a, c))
        dense = np.linalg.norm(a.projector() - b.projector()) / math.sqrt(2.0)
        frobenius.add(1e-10 - abs(ab - dense))
        projector = a.projector()
        idempotent.add(1e-10 - np.linalg.norm(projector @ projector - projector))

        moved = exp_map(_unit_tangent(rng, a), float(rng.uniform(0.0, math.pi)))
        exp_orth.add(1e-10 - np.linalg.norm(moved.basis.T @ moved.basis - np.eye(k)))

        d = int(rng.integers(1, n))
        spectrum = np.sort(rng.uniform(-5.0, 5.0, n)) + 0.1 * np.arange(n)
        rotation = orthonormalize(rng.standard_normal((n, n))).basis
        matrix = (rotation * spectrum) @ rotation.T
        matrix = 0.5 * (matrix + matrix.T)
        ours = top_eigenspace(matrix, d).basis
        _, vectors = np.linalg.eigh(matrix)
        brute = orthonormalize(vectors[:, ::-1][:, :d])
        eig.add(1e-9 - projector_distance(ours, brute))

        if 2 * k <= n - 1:
            lam = 6.0 - 4.0 * rng.random()
            center = _random_subspace(rng, n, k)
            dense_space = top_eigenspace(lam * center.projector() - a.projector(), k)
            if dense_space.gap_at_d > 1e-6:
                low = lowrank_top_eigenspace([(lam, center), (-1.0, a)], k)
                lowrank.add(1e-8 - projector_distance(dense_space.basis, low.basis))

    return [t.result() for t in (symmetry, triangle, frobenius, idempotent, exp_orth, eig, lowrank)]


def spectral_gap_suite(trials: int, rng: np.random.Generator) -> list[PropertyResult]:
    """Gap ``>= lam - 2`` and ``d_c(V_d(B), C) <= sqrt(k) / (lam - 2)``."""
    suite = "spectral-gap"
    gap = _Tally(suite, "gap-lower-bound")
    distance = _Tally(suite, "eigenspace-distance")
    for _ in range(trials):
        n, k, d = _random_dims(rng, 4, 30)
        y, center = _random_subspace(rng, n, k), _random_subspace(rng, n, d)
        lam = 6.0 - 4.0 * rng.random()
        space = top_eigenspace(lam * center.projector() - y.projector(), d)
        gap.add(space.gap_at_d - (lam - 2.0) + 1e-10)
        bound = math.sqrt(k) / (lam - 2.0)
        distance.add(bound + 1e-9 - chordal_distance(space.basis, center))
    return [gap.result(), distance.result()]


def inner_max_suite(
    trials: int,
    rng: np.random.Generator,
    samples_per_instance: int = 400,
) -> list[PropertyResult]:
    """Active maximizers lie on the boundary and dominate sampled ball points."""
    suite = "inner-max"
    boundary = _Tally(suite, "active-on-boundary")
    dominance = _Tally(suite, "dominates-samples")
    inactive = 0
    for _ in range(trials):
        n, k, d = _random_dims(rng, 6, 20)
        y, center = _random_subspace(rng, n, k), _random_subspace(rng, n, d)
        rho = float(rng.uniform(0.05, 0.9)) * math.sqrt(k)
        ball = UncertaintyBall(center, rho)
        solution = worst_case(y, ball, eps_bis=1e-9, solver="dense")
        if not solution.active:
            inactive += 1
            continue
        boundary.add(1e-5 - abs(chordal_distance(solution.maximizer, center) - rho))
        for index in range(samples_per_instance):
            sampler = sample_ball_boundary if index % 2 == 0 else sample_ball_interior
            candidate = sampler(center, rho, rng)
            dominance.add(solution.objective - chordal_distance(y, candidate) ** 2 + 1e-5)
    if inactive:
        dominance.notes.append(f"{inactive} inactive instances not sampled")
    return [boundary.result(), dominance.result()]


def gradient_suite(
    trials: int,
    rng: np.random.Generator,
    step: float = 1e-5,
) -> list[PropertyResult]:
    """Directional derivative of F against central differences along geodesics."""
    suite = "gradient"
    check = _Tally(suite, "finite-difference")
    skipped = 0
    attempts = 0
    accepted = 0
    while accepted < trials and attempts < 20 * max(trials, 1):
        attempts += 1
        n, k, d = _random_dims(rng, 6, 12)
        y, center = _random_subspace(rng, n, k), _random_subspace(rng, n, d)
        ball = UncertaintyBall(center, float(rng.uniform(0.05, 0.5)) * math.sqrt(k))
        solution = worst_case(y, ball, eps_bis=1e-13, solver="dense")
        gradient = robust_gradient(y, solution.maximizer)
        if not solution.active or solution.gap_at_d < 0.05 or gradient.norm < 1e-2:  # noqa: PLR2004
            skipped += 1
            continue
        accepted += 1
        for _ in range(5):
            tangent = _unit_tangent(rng, y)
            plus = worst_case(exp_map(tangent, step), ball, eps_bis=1e-13, solver="dense")
            minus = worst_case(exp_map(tangent, -step), ball, eps_bis=1e-13, solver="dense")
            if not (plus.active and minus.active):
                continue
            numeric = (plus.objective - minus.objective) / (2.0 * step)
            analytic = float(np.sum(gradient.direction * tangent.direction))
            check.add(1e-5 - abs(numeric - analytic) / gradient.norm)
    if skipped:
        check.notes.append(f"{skipped} degenerate or inactive instances skipped")
    return [check.result()]


def _drifting_run(
    rng: np.random.Generator,
    steps: int,
    cfg: TrackerConfig,
    amplitude: float = 0.3,
    noise_std: float = 0.01,
) -> tuple[RotatingSubspaceModel, LabeledStream, RunHistory]:
    seed = int(rng.integers(0, 2**31 - 1))
    model = make_rotating_model(cfg.n, cfg.k, amplitude, 60, 1.0, noise_std, seed)
    stream = generate_stream(model, None, steps + cfg.window_length + 1)
    history = track_stream(cfg, stream.observations, stream.truths)
    return model, stream, history


def descent_suite(trials: int, rng: np.random.Generator) -> list[PropertyResult]:
    """Objective never increases across inner iterations at a small step."""
    suite = "descent"
    check = _Tally(suite, "monotone-inner-objective")
    if trials <= 0:
        return [check.result()]
    cfg = TrackerConfig(
        n=20,
        k=3,
        d=5,
        window_length=8,
        inner_iterations=3,
        alpha=0.05,
        eps_bis=1e-12,
        radius=FixedRadius(rho=0.01),
        solver="dense",
        seed=int(rng.integers(0, 2**31 - 1)),
    )
    _, _, history = _drifting_run(rng, trials, cfg)
    for step in history.steps[:trials]:
        trace = step.f_trace
        for before, after in zip(trace, trace[1:], strict=False):
            check.add(before - after + 1e-9)
    return [check.result()]


_PL_RUNS: tuple[tuple[int, int, float], ...] = ((2, 4, 0.05), (2, 2, 0.25))


def pl_suite(trials: int, rng: np.random.Generator) -> list[PropertyResult]:
    """Gradient dominance ``‖grad F‖² >= 2 nu (F - F*)`` on eligible iterates.

    ``nu = 2 (1 + (d - k) - r²)`` with ``r = d_c(Û_{t-1}, U_{t-1}) + mu + 2 rho_t``.
    The inequality holds for iterates with ``F <= r²``; iterates above that
    level or with ``nu <= 0`` are counted as skipped. Each ``(k, d, rho)`` of
    ``_PL_RUNS`` contributes a run of ``trials`` steps.
    """
    suite = "pl"
    check = _Tally(suite, "gradient-dominance")
    if trials <= 0:
        return [check.result()]
    skipped = 0
    for k, d, rho in _PL_RUNS:
        cfg = TrackerConfig(
            n=16,
            k=k,
            d=d,
            window_length=6,
            inner_iterations=3,
            alpha=0.05,
            eps_bis=1e-12,
            radius=FixedRadius(rho=rho),
            solver="dense",
            seed=int(rng.integers(0, 2**31 - 1)),
        )
        model, stream, history = _drifting_run(rng, trials, cfg)
        mu = float(drift_sequence(model).max())
        truth_by_time = dict(zip(stream.times.tolist(), stream.truths, strict=True))

        eligible = []
        for record in history.records[:trials]:
            diagnostics = record.diagnostics
            previous_truth = truth_by_time[diagnostics.t - 1]
            r_tilde = chordal_distance(record.prior, previous_truth) + mu + 2.0 * diagnostics.rho_t
            nu = 2.0 * (1.0 + (d - k) - r_tilde**2)
            iterates = list(zip(diagnostics.f_trace, diagnostics.grad_norms, strict=False))
            pairs = [pair for pair in iterates if pair[0] <= r_tilde**2] if nu > 0.0 else []
            skipped += len(iterates) - len(pairs)
            if pairs:
                eligible.append((record, nu, pairs))
        if not eligible:
            continue

        kept = [record for record, _, _ in eligible]
        f_star = oracle_f_star(replace(history, records=kept), max_iter=500)
        for (_, nu, pairs), optimum in zip(eligible, f_star, strict=True):
            for value, norm in pairs:
                check.add(norm**2 - 2.0 * nu * (value - optimum) + 1e-9)
    if skipped:
        check.notes.append(f"{skipped} iterates outside the dominance region skipped")
    return [check.result()]


def bound_suite(trials: int, rng: np.random.Generator, steps: int = 60) -> list[PropertyResult]:
    """Empirical contraction below one and no error-bound violations."""
    suite = "bound"
    contraction = _Tally(suite, "contraction-below-one")
    violations = _Tally(suite, "error-bound")
    for _ in range(trials):
        noise_std = 0.01
        n, k, d, window = 12, 2, 3, 5
        cfg = TrackerConfig(
            n=n,
            k=k,
            d=d,
            window_length=window,
            inner_iterations=3,
            alpha=0.05,
            eps_bis=1e-12,
            radius=AdaptiveRadius(
                mu_est=0.05,
                eps_est=3.0 * noise_std * math.sqrt(n),
                p_cap=0.15,
                include_dk_term=True,
            ),
            solver="dense",
            seed=int(rng.integers(0, 2**31 - 1)),
        )
        model, _, history = _drifting_run(rng, steps, cfg, amplitude=0.2, noise_std=noise_std)
        try:
            beta_hat = contraction_estimate(history.steps, oracle_f_star(history, max_iter=500))
        except InsufficientDataError:
            contraction.notes.append("run without usable optimality gaps")
            continue
        contraction.add(1.0 - beta_hat)
        if beta_hat >= 1.0:
            continue
        report = bound_report(history, beta_hat, float(drift_sequence(model).max()))
        for excess in report.rhs - report.tracking_error:
            violations.add(float(excess) + 1e-12)
    return [contraction.result(), violations.result()]


SuiteRunner = Callable[[int, np.random.Generator], list[PropertyResult]]

SUITES: dict[str, SuiteRunner] = {
    "geometry": geometry_suite,
    "spectral-gap": spectral_gap_suite,
    "inner-max": inner_max_suite,
    "gradient": gradient_suite,
    "descent": descent_suite,
    "pl": pl_suite,
    "bound": bound_suite,
}

DEFAULT_TRIALS: dict[str, int] = {
    "geometry": 200,
    "spectral-gap": 1000,
    "inner-max": 100,
    "gradient": 100,
    "descent": 200,
    "pl": 100,
    "bound": 10,
}


def run_property_suite(name: str, budget: int | None = None, seed: int = 0) -> SuiteReport:
    """Run a named suite.

    Args:
        name: Suite name (see ``SUITES``).
        budget: Number of trials; ``None`` uses the suite default.
        seed: Seed of the instance generator.

    Returns:
        SuiteReport; a zero budget yields an empty report noted "no trials".

    Raises:
        UnknownSuiteError: If the suite name is not registered.
    """
    if name not in SUITES:
        raise UnknownSuiteError(name, sorted(SUITES))
    trials = DEFAULT_TRIALS[name] if budget is None else budget
    if trials <= 0:
        return SuiteReport(name, (), note="no trials")

    rng = np.random.default_rng(seed)
    _logger.info("Running property suite '%s' with %d trials", name, trials)
    results = tuple(SUITES[name](trials, rng))
    for result in results:
        if not result.passed:
            _logger.warning(
                "Property %s/%s failed %d of %d trials (worst margin %.3e)",
                name,
                result.name,
                result.failures,
                result.trials,
                result.worst_margin,
            )
    return SuiteReport(name, results)


__all__ = [
    "DEFAULT_TRIALS",
    "SUITES",
    "PropertyResult",
    "SuiteReport",
    "run_property_suite",
]
