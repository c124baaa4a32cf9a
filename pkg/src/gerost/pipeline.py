"""Monte-Carlo experiment pipeline.

Each seed draws one labeled stream from the generator profile and runs
every configured tracker over it. Frames in the evaluation range are
scored with the estimate that preceded them, so the occluder present in a
frame cannot leak into the subspace used to score it.

Seeds run in a process pool. Results are collected as they complete and
written in seed order, so the artifacts depend on the configuration and
the seeds only.
"""

import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np
import pandas as pd
from pydantic import BaseModel

from gerost.config import settings
from gerost.data.generators import LabeledStream, drift_sequence, generate_stream
from gerost.data.stream_io import export_stream
from gerost.evaluation.bounds import bound_report
from gerost.evaluation.metrics import SCORE_FUNCTION, exact_auc, foreground_scores, roc
from gerost.exceptions import GerostError, InsufficientDataError, OutputError
from gerost.experiment import SCHEMA_VERSION, ExperimentConfig
from gerost.tracking.config import AdaptiveRadius, TrackerConfig
from gerost.tracking.tracker import (
    RunHistory,
    contraction_estimate,
    oracle_f_star,
    track_stream,
)
from gerost.visualization.plotting import (
    plot_foreground_snapshot,
    plot_radius_multiplier,
    plot_roc,
    plot_tracking_error,
    save_figure,
)


if TYPE_CHECKING:
    from numpy.typing import NDArray


_logger = logging.getLogger(__name__)

METRIC_COLUMNS = ["t", "tracking_error", "rho_t", "lambda_star", "f_before", "f_after"]


class TrackerSummary(BaseModel):
    """Headline numbers of one tracker on one seed."""

    name: str
    mode: str
    auc: float
    auc_exact: float
    steps: int
    mean_tracking_error: float
    final_tracking_error: float
    median_lambda_before_occlusion: float | None = None
    median_lambda_during_occlusion: float | None = None
    beta_hat: float | None = None
    violations: int | None = None


class SeedSummary(BaseModel):
    """All trackers of one seed."""

    seed: int
    trackers: list[TrackerSummary]

    def tracker(self, name: str) -> TrackerSummary:
        """Return the summary of tracker ``name``.

        Raises:
            KeyError: If no tracker has that name.
        """
        for summary in self.trackers:
            if summary.name == name:
                return summary
        raise KeyError(name)


class ExperimentSummary(BaseModel):
    """Machine-readable report written to ``summary.json``."""

    schema_version: str = SCHEMA_VERSION
    score_function: str = SCORE_FUNCTION
    profile: str
    evaluation_range: tuple[int, int]
    n_thresholds: int
    seeds: list[SeedSummary]

    def aucs(self, name: str) -> list[float]:
        """Grid AUC of tracker ``name`` for every seed, in seed order."""
        return [seed.tracker(name).auc for seed in self.seeds]


@dataclass(frozen=True)
class ForegroundSnapshot:
    """One frame split into background and residual by a tracker's prior."""

    t: int
    frame: "NDArray[np.float64]"
    background: "NDArray[np.float64]"
    residual: "NDArray[np.float64]"


@dataclass
class TrackerOutcome:
    """Tables and summary of one tracker on one seed."""

    summary: TrackerSummary
    metrics: pd.DataFrame
    diagnostics: pd.DataFrame
    roc: pd.DataFrame
    snapshot: ForegroundSnapshot | None = None


@dataclass
class TrialResult:
    """Everything produced for one seed."""

    seed: int
    outcomes: list[TrackerOutcome] = field(default_factory=list)
    stream: LabeledStream | None = None


def _median_lambda(history: RunHistory, start: int, stop: int | None) -> float | None:
    values = [
        step.lambda_star
        for step in history.steps
        if step.lambda_star is not None and step.t >= start and (stop is None or step.t < stop)
    ]
    return float(np.median(values)) if values else None


def _contraction(
    history: RunHistory,
    cfg: TrackerConfig,
    max_iter: int,
    mu_hat: float,
) -> tuple[float | None, int | None]:
    """Empirical contraction factor and bound violations of a robust run."""
    try:
        f_star = oracle_f_star(history, max_iter=max_iter)
        beta_hat = contraction_estimate(history.steps, f_star)
    except InsufficientDataError as e:
        _logger.warning("No contraction estimate: %s", e)
        return None, None
    if not isinstance(cfg.radius, AdaptiveRadius) or not 0.0 <= beta_hat < 1.0:
        return beta_hat, None
    try:
        report = bound_report(history, beta_hat, mu_hat)
    except GerostError as e:
        _logger.warning("No bound report: %s", e)
        return beta_hat, None
    return beta_hat, report.n_violations


def evaluate_tracker(
    name: str,
    cfg: TrackerConfig,
    stream: LabeledStream,
    config: ExperimentConfig,
    mu_hat: float,
) -> TrackerOutcome:
    """Run one tracker over a stream and score the evaluation range.

    Raises:
        InsufficientDataError: If no descent step falls in the range.
        DegenerateLabelsError: If the range has no foreground or no background.
    """
    history = track_stream(cfg, stream.observations, stream.truths)
    first, last = config.frame_range
    offset = int(stream.times[0])
    snapshot = None

    scores, masks = [], []
    for record in history.records:
        t = record.diagnostics.t
        if t == config.snapshot_frame:
            frame = stream.observations[t - offset]
            background = record.prior.project(frame)
            snapshot = ForegroundSnapshot(t, frame, background, frame - background)
        if first <= t <= last:
            index = t - offset
            scores.append(foreground_scores(stream.observations[index], record.prior))
            masks.append(stream.masks[index])
    if snapshot is None:
        _logger.debug("No descent step at snapshot frame %d for %s", config.snapshot_frame, name)
    if not scores:
        msg = f"No descent step in frames [{first}, {last}] for {name}"
        raise InsufficientDataError(msg)

    curve = roc(scores, masks, config.evaluation.n_thresholds)
    errors = history.tracking_errors()

    beta_hat, violations = None, None
    if config.evaluation.oracle_iterations > 0 and cfg.mode == "gerost":
        beta_hat, violations = _contraction(
            history, cfg, config.evaluation.oracle_iterations, mu_hat
        )

    occlusion_start = config.generator.occlusion_start
    summary = TrackerSummary(
        name=name,
        mode=cfg.mode,
        auc=curve.auc,
        auc_exact=exact_auc(scores, masks),
        steps=len(history.records),
        mean_tracking_error=float(errors.mean()),
        final_tracking_error=float(errors[-1]),
        median_lambda_before_occlusion=_median_lambda(history, 0, occlusion_start),
        median_lambda_during_occlusion=_median_lambda(history, occlusion_start, None),
        beta_hat=beta_hat,
        violations=violations,
    )
    diagnostics = pd.DataFrame([step.as_record() for step in history.steps])
    return TrackerOutcome(
        summary=summary,
        metrics=diagnostics[METRIC_COLUMNS].copy(),
        diagnostics=diagnostics,
        roc=pd.DataFrame({"fpr": curve.fpr, "tpr": curve.tpr, "threshold": curve.thresholds}),
        snapshot=snapshot,
    )


def run_trial(config: ExperimentConfig, seed: int) -> TrialResult:
    """Generate the stream of ``seed`` and evaluate every tracker on it."""
    model, occlusion = config.generator.build(seed)
    stream = generate_stream(model, occlusion, config.generator.period)
    mu_hat = float(drift_sequence(model).max())

    result = TrialResult(seed=seed, stream=stream if config.export_stream else None)
    for name, cfg in config.tracker_configs(seed).items():
        outcome = evaluate_tracker(name, cfg, stream, config, mu_hat)
        _logger.info("seed=%d tracker=%s auc=%.4f", seed, name, outcome.summary.auc)
        result.outcomes.append(outcome)
    return result


class ExperimentPipeline:
    """Runs an experiment and writes its artifacts.

    Layout under the output directory::

        summary.json
        seed_<s>/<tracker>_metrics.csv
        seed_<s>/<tracker>_diagnostics.csv
        seed_<s>/<tracker>_roc.csv
        seed_<s>/*.png                (with plots enabled)
        seed_<s>/stream/              (with stream export enabled)

    Example:
        >>> pipeline = ExperimentPipeline(load_experiment_config("configs/desk_occlusion.toml"))
        >>> summary = pipeline.run()
        >>> len(summary.aucs("gerost")) == len(summary.seeds)
        True
    """

    def __init__(
        self,
        config: ExperimentConfig,
        output_dir: Path | str | None = None,
        workers: int | None = None,
    ) -> None:
        """Initialize the pipeline.

        Args:
            config: Validated experiment configuration.
            output_dir: Overrides ``config.output_dir``.
            workers: Overrides ``config.workers`` and the runtime setting.
        """
        self.config = config
        self.output_dir = Path(output_dir) if output_dir is not None else config.output_dir
        self.workers = self._resolve_workers(workers)

    def _resolve_workers(self, workers: int | None) -> int:
        requested = workers if workers is not None else self.config.workers
        if requested is None:
            requested = settings.max_workers
        if requested == 0:
            requested = os.cpu_count() or 1
        return max(1, min(requested, len(self.config.seeds)))

    def run(self) -> ExperimentSummary:
        """Run every seed, write the artifacts and return the summary.

        Raises:
            OutputError: If an artifact cannot be written.
        """
        _logger.info(
            "Running %d seeds with %d workers into %s",
            len(self.config.seeds),
            self.workers,
            self.output_dir,
        )
        trials = self._run_trials()
        for trial in trials:
            self.write_trial(trial)

        first, last = self.config.frame_range
        summary = ExperimentSummary(
            profile=self.config.generator.name,
            evaluation_range=(first, last),
            n_thresholds=self.config.evaluation.n_thresholds,
            seeds=[
                SeedSummary(seed=t.seed, trackers=[o.summary for o in t.outcomes])
                for t in trials
            ],
        )
        self.write_summary(summary)
        for spec in self.config.trackers:
            aucs = summary.aucs(spec.name)
            _logger.info(
                "%s: mean auc %.4f over %d seeds", spec.name, math.fsum(aucs) / len(aucs), len(aucs)
            )
        return summary

    def _run_trials(self) -> list[TrialResult]:
        seeds = self.config.seeds
        if self.workers == 1:
            return [run_trial(self.config, seed) for seed in seeds]

        results: dict[int, TrialResult] = {}
        with ProcessPoolExecutor(max_workers=self.workers) as executor:
            futures = {executor.submit(run_trial, self.config, seed): seed for seed in seeds}
            for future in as_completed(futures):
                seed = futures[future]
                results[seed] = future.result()
                _logger.info("Seed %d finished", seed)
        return [results[seed] for seed in seeds]

    def _target(self, *parts: str | Path) -> Path:
        """Resolve a path inside the output directory.

        Raises:
            OutputError: If the path escapes the output directory.
        """
        root = self.output_dir.resolve()
        path = root.joinpath(*parts).resolve()
        if path != root and root not in path.parents:
            raise OutputError(str(path), "Refusing to write outside the output directory")
        return path

    def _mkdir(self, path: Path) -> None:
        try:
            path.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise OutputError(str(path), f"Failed to create directory: {e}") from e

    def _write_table(self, frame: pd.DataFrame, path: Path) -> Path:
        try:
            frame.to_csv(path, index=False, float_format=settings.float_format)
        except OSError as e:
            raise OutputError(str(path), f"Failed to write CSV: {e}") from e
        return path

    def write_trial(self, trial: TrialResult) -> list[Path]:
        """Write the tables (and figures) of one seed.

        Returns:
            Written paths.

        Raises:
            OutputError: If a file cannot be written.
        """
        seed_dir = self._target(f"seed_{trial.seed}")
        self._mkdir(seed_dir)
        written = []
        for outcome in trial.outcomes:
            name = outcome.summary.name
            tables = {
                "metrics": outcome.metrics,
                "diagnostics": outcome.diagnostics,
                "roc": outcome.roc,
            }
            for kind, frame in tables.items():
                path = self._target(seed_dir, f"{name}_{kind}.csv")
                written.append(self._write_table(frame, path))

        if self.config.plots:
            written.extend(self._write_figures(trial, seed_dir))
        if trial.stream is not None:
            for fmt in self.config.formats:
                paths = export_stream(trial.stream, self._target(seed_dir, "stream"), fmt)
                written.extend(paths.values())

        _logger.info("Wrote %d artifacts to %s", len(written), seed_dir)
        return written

    def _write_figures(self, trial: TrialResult, seed_dir: Path) -> list[Path]:
        metrics = {o.summary.name: o.metrics for o in trial.outcomes}
        curves = {o.summary.name: o.roc for o in trial.outcomes}
        paths = [
            save_figure(plot_tracking_error(metrics), self._target(seed_dir, "tracking_error.png")),
            save_figure(plot_roc(curves), self._target(seed_dir, "roc.png")),
        ]
        occlusion_start = self.config.generator.occlusion_start
        shape = (self.config.generator.frame_height, self.config.generator.frame_width)
        for outcome in trial.outcomes:
            name = outcome.summary.name
            if outcome.summary.mode == "gerost":
                ax = plot_radius_multiplier(outcome.diagnostics, occlusion_start)
                paths.append(save_figure(ax, self._target(seed_dir, f"{name}_radius.png")))
            if outcome.snapshot is not None:
                snap = outcome.snapshot
                figure = plot_foreground_snapshot(
                    snap.frame,
                    snap.background,
                    snap.residual,
                    shape,
                    title=f"{name} at frame {snap.t}",
                )
                paths.append(save_figure(figure, self._target(seed_dir, f"{name}_snapshot.png")))
        return paths

    def write_summary(self, summary: ExperimentSummary) -> Path:
        """Write ``summary.json``.

        Raises:
            OutputError: If the file cannot be written.
        """
        self._mkdir(self._target())
        path = self._target("summary.json")
        try:
            path.write_text(summary.model_dump_json(indent=2) + "\n", encoding="utf-8")
        except OSError as e:
            raise OutputError(str(path), f"Failed to write summary: {e}") from e
        _logger.info("Summary written to %s", path)
        return path


def run_experiment(
    config: ExperimentConfig,
    output_dir: Path | str | None = None,
    workers: int | None = None,
) -> ExperimentSummary:
    """Convenience wrapper around ``ExperimentPipeline.run``."""
    return ExperimentPipeline(config, output_dir=output_dir, workers=workers).run()
