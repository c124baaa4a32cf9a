"""Experiment configuration.

An experiment is described by a small TOML file::

    schema = "gerost-experiment/1"
    seeds = [1, 2]

    [generator]
    name = "desk"

    [[trackers]]
    name = "gerost"
    mode = "gerost"
    d = 7
    window_length = 10

    [trackers.radius]
    policy = "adaptive"
    mu_est = 0.06

Parsing and validation failures are reported as ``ConfigError`` with the
offending line and dotted field path where they can be located.
"""

import logging
import re
import tomllib
from pathlib import Path
from typing import Any, Literal, Self

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from gerost.config import TOLERANCES, settings
from gerost.data.generators import PROFILES, GeneratorProfile
from gerost.data.stream_io import StreamFormat
from gerost.exceptions import ConfigError
from gerost.tracking.config import AdaptiveRadius, FixedRadius, RadiusPolicy, TrackerConfig


_logger = logging.getLogger(__name__)

SCHEMA_VERSION = "gerost-experiment/1"

_LINE_PATTERN = re.compile(r"line (\d+)")


class TrackerSpec(BaseModel):
    """One tracker of an experiment.

    The ambient dimension and subspace rank come from the generator; every
    other ``TrackerConfig`` field is set here.
    """

    name: str = Field(pattern=r"^[A-Za-z0-9_-]+$")
    mode: Literal["gerost", "great"] = "gerost"
    d: int = Field(ge=1)
    window_length: int = Field(ge=1)
    inner_iterations: int = Field(default=1, ge=1)
    alpha: float = Field(default=0.25, gt=0.0)
    eps_bis: float = Field(default=TOLERANCES.eps_bis, gt=0.0)
    radius: RadiusPolicy = Field(default_factory=lambda: FixedRadius(rho=0.1))
    solver: Literal["auto", "dense", "lowrank"] = Field(default_factory=lambda: settings.solver)

    model_config = ConfigDict(frozen=True, extra="forbid")

    def to_tracker_config(self, n: int, k: int, seed: int) -> TrackerConfig:
        """Bind the tracker entry to a stream of dimension ``n`` and rank ``k``."""
        return TrackerConfig(
            n=n,
            k=k,
            d=self.d,
            window_length=self.window_length,
            inner_iterations=self.inner_iterations,
            alpha=self.alpha,
            eps_bis=self.eps_bis,
            radius=self.radius,
            mode=self.mode,
            solver=self.solver,
            seed=seed,
        )


class EvaluationSpec(BaseModel):
    """Frames scored for detection and optional contraction analysis.

    Attributes:
        first_frame: First scored frame (defaults to the occlusion start).
        last_frame: Last scored frame (defaults to the last frame).
        n_thresholds: Quantile levels of the ROC grid.
        oracle_iterations: Descent iterations of the F* oracle; 0 disables
            the contraction estimate and the bound report.
        snapshot_frame: Frame shown in the background and residual snapshot
            (defaults to the last scored frame).
    """

    first_frame: int | None = Field(default=None, ge=1)
    last_frame: int | None = Field(default=None, ge=1)
    n_thresholds: int = Field(default=256, ge=2)
    oracle_iterations: int = Field(default=0, ge=0)
    snapshot_frame: int | None = Field(default=None, ge=1)

    model_config = ConfigDict(frozen=True, extra="forbid")


class ExperimentConfig(BaseModel):
    """A complete experiment: data, trackers, evaluation and outputs.

    Attributes:
        schema_version: Must equal ``SCHEMA_VERSION`` (key ``schema``).
        generator: Data generator profile.
        trackers: Trackers run on every stream.
        evaluation: Scored frame range and analysis options.
        seeds: Monte-Carlo seeds, one stream per seed.
        output_dir: Artifact directory.
        formats: Formats of exported streams.
        export_stream: Also write each seed's observations and masks.
        plots: Render PNG figures next to the CSVs.
        workers: Worker processes (``None`` uses the runtime setting).
    """

    schema_version: Literal["gerost-experiment/1"] = Field(alias="schema")
    generator: GeneratorProfile = Field(default_factory=lambda: PROFILES["desk"])
    trackers: list[TrackerSpec] = Field(min_length=1)
    evaluation: EvaluationSpec = Field(default_factory=EvaluationSpec)
    seeds: list[int] = Field(default_factory=lambda: [0], min_length=1)
    output_dir: Path = Field(default_factory=lambda: settings.output_dir)
    formats: list[StreamFormat] = Field(default_factory=lambda: ["csv"], min_length=1)
    export_stream: bool = False
    plots: bool = False
    workers: int | None = Field(default=None, ge=0)

    model_config = ConfigDict(frozen=True, extra="forbid", populate_by_name=True)

    @model_validator(mode="after")
    def _check_consistency(self) -> Self:
        names = [tracker.name for tracker in self.trackers]
        duplicates = sorted({name for name in names if names.count(name) > 1})
        if duplicates:
            msg = f"duplicate tracker names: {', '.join(duplicates)}"
            raise ValueError(msg)
        if len(set(self.seeds)) != len(self.seeds):
            msg = "seeds must be distinct"
            raise ValueError(msg)

        first, last = self.frame_range
        if not 1 <= first <= last <= self.generator.period:
            msg = f"evaluation range [{first}, {last}] must lie inside [1, {self.generator.period}]"
            raise ValueError(msg)
        if self.snapshot_frame > self.generator.period:
            period = self.generator.period
            msg = f"snapshot frame {self.snapshot_frame} must lie inside [1, {period}]"
            raise ValueError(msg)

        for tracker in self.trackers:
            try:
                tracker.to_tracker_config(self.generator.n, self.generator.rank, seed=0)
            except ValidationError as e:
                message = "; ".join(error["msg"] for error in e.errors())
                msg = f"tracker '{tracker.name}': {message}"
                raise ValueError(msg) from e
        return self

    @property
    def frame_range(self) -> tuple[int, int]:
        """Inclusive range of scored frames."""
        first = self.evaluation.first_frame or self.generator.occlusion_start
        last = self.evaluation.last_frame or self.generator.period
        return first, last

    @property
    def snapshot_frame(self) -> int:
        """Frame of the foreground snapshot figure."""
        return self.evaluation.snapshot_frame or self.frame_range[1]

    def tracker_configs(self, seed: int) -> dict[str, TrackerConfig]:
        """Bound tracker configurations for one seed, keyed by name."""
        n, k = self.generator.n, self.generator.rank
        return {spec.name: spec.to_tracker_config(n, k, seed) for spec in self.trackers}


def _decode_line(error: tomllib.TOMLDecodeError) -> int | None:
    line = getattr(error, "lineno", None)
    if isinstance(line, int):
        return line
    match = _LINE_PATTERN.search(str(error))
    return int(match.group(1)) if match else None


def _locate(source: str | None, loc: tuple[int | str, ...]) -> int | None:
    """Best-effort line of the innermost key in ``loc``."""
    if not source:
        return None
    keys = [part for part in loc if isinstance(part, str)]
    lines = source.splitlines()
    for key in reversed(keys):
        assignment = re.compile(rf"^\s*{re.escape(key)}\s*=")
        section = re.compile(rf"^\s*\[\[?\s*(?:[\w.-]+\.)?{re.escape(key)}\s*\]\]?")
        for number, text in enumerate(lines, start=1):
            if assignment.match(text) or section.match(text):
                return number
    return None


def parse_experiment_config(data: dict[str, Any], source: str | None = None) -> ExperimentConfig:
    """Validate a decoded configuration mapping.

    Args:
        data: Decoded TOML document.
        source: Original text, used to locate the offending line.

    Raises:
        ConfigError: On the first validation error.
    """
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        loc = tuple(first["loc"])
        field = ".".join(str(part) for part in loc) or None
        raise ConfigError(first["msg"], field=field, line=_locate(source, loc)) from e


def load_experiment_config(path: Path | str) -> ExperimentConfig:
    """Load and validate an experiment file.

    Raises:
        ConfigError: If the file cannot be read, is not valid TOML or fails
            validation.

    Example:
        >>> config = load_experiment_config("configs/desk_occlusion.toml")
        >>> [tracker.name for tracker in config.trackers]
        ['gerost', 'great']
    """
    path = Path(path)
    try:
        source = path.read_text(encoding="utf-8")
    except OSError as e:
        msg = f"cannot read {path}: {e}"
        raise ConfigError(msg) from e
    try:
        data = tomllib.loads(source)
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(str(e), line=_decode_line(e)) from e

    config = parse_experiment_config(data, source)
    _logger.info(
        "Loaded experiment %s (%d trackers, %d seeds)",
        path,
        len(config.trackers),
        len(config.seeds),
    )
    return config


def default_experiment_config(profile: str = "desk") -> ExperimentConfig:
    """Occlusion study comparing the robust and the nominal tracker.

    Raises:
        ConfigError: If ``profile`` is not a built-in generator profile.
    """
    if profile not in PROFILES:
        msg = f"unknown profile '{profile}'"
        raise ConfigError(msg, field="generator.name")
    generator = PROFILES[profile]
    robust = TrackerSpec(
        name="gerost",
        mode="gerost",
        d=generator.rank + 2,
        window_length=10,
        inner_iterations=3,
        alpha=0.25,
        radius=AdaptiveRadius(
            mu_est=0.06,
            eps_est=generator.eps_estimate(),
            p_cap=0.15,
        ),
    )
    nominal = TrackerSpec(
        name="great",
        mode="great",
        d=generator.rank,
        window_length=10,
        inner_iterations=3,
        alpha=0.25,
    )
    return ExperimentConfig(
        schema=SCHEMA_VERSION,
        generator=generator,
        trackers=[robust, nominal],
    )
