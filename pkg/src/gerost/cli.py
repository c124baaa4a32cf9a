"""Command-line interface.

Usage:
    # Run an experiment described by a TOML file
    gerost run configs/desk_occlusion.toml --seed 1 2 --out results/occlusion

    # Run one property suite (or all of them) with a trial budget
    gerost props spectral-gap --trials 1000
    gerost props all

    # Export a synthetic stream
    gerost gen desk --out data/desk --format bin

Exit codes: 0 success, 1 property failure, 2 configuration or usage error,
3 I/O error.
"""

import argparse
import logging
import math
import sys
from collections.abc import Sequence
from pathlib import Path

from gerost.config import settings
from gerost.data.generators import PROFILES, generate_stream
from gerost.data.stream_io import export_stream, get_stream_statistics
from gerost.evaluation.properties import SUITES, SuiteReport, run_property_suite
from gerost.exceptions import (
    ConfigError,
    GerostError,
    OutputError,
    StreamLoadError,
    UnknownSuiteError,
)
from gerost.experiment import load_experiment_config
from gerost.pipeline import ExperimentSummary, run_experiment


_logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_PROPERTY_FAILURE = 1
EXIT_CONFIG_ERROR = 2
EXIT_IO_ERROR = 3


def configure_logging(level: str | int = "INFO") -> None:
    """Send log records of every module to stderr."""
    logging.basicConfig(
        level=level,
        format="%(asctime)s %(levelname)-8s %(name)s: %(message)s",
        stream=sys.stderr,
        force=True,
    )


def _print_summary(summary: ExperimentSummary) -> None:
    first, last = summary.evaluation_range
    print(f"Frames {first}..{last}, score '{summary.score_function}'")
    names = [tracker.name for tracker in summary.seeds[0].trackers]
    for seed in summary.seeds:
        cells = ", ".join(f"{name}={seed.tracker(name).auc:.4f}" for name in names)
        print(f"  seed {seed.seed}: {cells}")
    for name in names:
        aucs = summary.aucs(name)
        print(f"  mean auc {name}: {math.fsum(aucs) / len(aucs):.4f}")


def handle_run(args: argparse.Namespace) -> int:
    """Handle the ``run`` command."""
    config = load_experiment_config(args.config)
    updates: dict[str, object] = {}
    if args.seed:
        updates["seeds"] = list(dict.fromkeys(args.seed))
    if args.format:
        updates["formats"] = [args.format]
        updates["export_stream"] = True
    if args.plots:
        updates["plots"] = True
    if updates:
        config = config.model_copy(update=updates)

    summary = run_experiment(config, output_dir=args.out, workers=args.workers)
    _print_summary(summary)
    print(f"\nArtifacts written to {args.out or config.output_dir}")
    return EXIT_OK


def _print_report(report: SuiteReport) -> None:
    status = "PASS" if report.passed else "FAIL"
    print(f"[{status}] {report.suite}" + (f" ({report.note})" if report.note else ""))
    for result in report.results:
        mark = "ok" if result.passed else "FAILED"
        line = (
            f"    {result.name:<32} trials={result.trials:<5} failures={result.failures:<4} "
            f"worst_margin={result.worst_margin:.3e}  {mark}"
        )
        print(line + (f"  [{result.note}]" if result.note else ""))


def handle_props(args: argparse.Namespace) -> int:
    """Handle the ``props`` command."""
    names = list(SUITES) if args.suite == "all" else [args.suite]
    failed = False
    for name in names:
        report = run_property_suite(name, budget=args.trials, seed=args.seed)
        _print_report(report)
        failed = failed or not report.passed
    return EXIT_PROPERTY_FAILURE if failed else EXIT_OK


def handle_gen(args: argparse.Namespace) -> int:
    """Handle the ``gen`` command."""
    if args.profile not in PROFILES:
        msg = f"unknown profile '{args.profile}' (known: {', '.join(PROFILES)})"
        raise ConfigError(msg, field="profile")
    profile = PROFILES[args.profile]
    model, occlusion = profile.build(args.seed)
    stream = generate_stream(model, occlusion, profile.period)
    paths = export_stream(stream, args.out, args.format)

    stats = get_stream_statistics(stream.observations)
    print(f"Profile '{profile.name}': {stats['n_frames']} frames of {stats['n_pixels']} pixels")
    for artifact, path in paths.items():
        print(f"  {artifact}: {path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    """Build the argument parser with its three subcommands."""
    parser = argparse.ArgumentParser(
        prog="gerost",
        description="Robust subspace tracking experiments and property checks.",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  %(prog)s run configs/desk_occlusion.toml --seed 1 2  Occlusion study on two seeds
  %(prog)s props all --trials 20                   Quick pass over every suite
  %(prog)s gen desk --out data/desk                Export the desk stream
        """,
    )
    parser.add_argument(
        "--log-level",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        default=None,
        help=f"Logging level (default: {settings.log_level})",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="Run an experiment from a TOML file")
    run.add_argument("config", type=Path, help="Experiment configuration file")
    run.add_argument("--seed", type=int, nargs="+", default=None, help="Override the seeds")
    run.add_argument("--out", type=Path, default=None, help="Output directory")
    run.add_argument(
        "--format",
        choices=["csv", "bin"],
        default=None,
        help="Also export each seed's stream in this format",
    )
    run.add_argument("--plots", action="store_true", help="Render PNG figures")
    run.add_argument("--workers", type=int, default=None, help="Worker processes (0 = all)")
    run.set_defaults(handler=handle_run)

    props = commands.add_parser("props", help="Run property suites")
    props.add_argument("suite", help=f"Suite name or 'all' ({', '.join(SUITES)})")
    props.add_argument("--trials", type=int, default=None, help="Trial budget per suite")
    props.add_argument("--seed", type=int, default=0, help="Random seed (default: 0)")
    props.set_defaults(handler=handle_props)

    gen = commands.add_parser("gen", help="Export a synthetic stream")
    gen.add_argument("profile", help=f"Generator profile ({', '.join(PROFILES)})")
    gen.add_argument("--out", type=Path, required=True, help="Output directory")
    gen.add_argument("--format", choices=["csv", "bin"], default="csv", help="File format")
    gen.add_argument("--seed", type=int, default=0, help="Random seed (default: 0)")
    gen.set_defaults(handler=handle_gen)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    """Main entry point of the ``gerost`` command."""
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.log_level or settings.log_level)

    try:
        return int(args.handler(args))
    except (ConfigError, UnknownSuiteError) as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except (OutputError, StreamLoadError, OSError) as e:
        print(f"I/O error: {e}", file=sys.stderr)
        return EXIT_IO_ERROR
    except GerostError as e:
        _logger.error("Experiment failed: %s", e)
        return EXIT_CONFIG_ERROR


if __name__ == "__main__":
    sys.exit(main())
