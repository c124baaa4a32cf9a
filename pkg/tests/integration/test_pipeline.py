"""End-to-end tests of the experiment pipeline."""

import json
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from gerost.experiment import (
    default_experiment_config,
    load_experiment_config,
    parse_experiment_config,
)
from gerost.pipeline import METRIC_COLUMNS, ExperimentPipeline, run_experiment, run_trial


pytestmark = pytest.mark.integration

TINY_EXPERIMENT = {
    "schema": "gerost-experiment/1",
    "seeds": [3, 4],
    "generator": {
        "frame_height": 6,
        "frame_width": 6,
        "rank": 2,
        "amplitude": 0.3,
        "period": 40,
        "coeff_std": 10.0,
        "noise_std": 0.01,
        "occlusion_start": 15,
        "square_size": 3,
        "intensity": 5.0,
    },
    "evaluation": {"oracle_iterations": 20},
    "trackers": [
        {
            "name": "gerost",
            "mode": "gerost",
            "d": 4,
            "window_length": 6,
            "inner_iterations": 2,
            "radius": {"policy": "adaptive", "mu_est": 0.05, "eps_est": 0.18, "p_cap": 0.15},
        },
        {"name": "great", "mode": "great", "d": 2, "window_length": 6, "inner_iterations": 2},
    ],
    "plots": True,
    "export_stream": True,
    "formats": ["csv", "bin"],
}


@pytest.fixture
def tiny_config():
    """Two seeds of a 6x6 stream with both trackers."""
    return parse_experiment_config(TINY_EXPERIMENT)


def _artifacts(root: Path) -> dict[str, bytes]:
    return {
        str(path.relative_to(root)): path.read_bytes()
        for path in sorted(root.rglob("*"))
        if path.is_file() and path.suffix in {".csv", ".json", ".bin"}
    }


class TestExperimentPipeline:
    """Tests for ExperimentPipeline and run_experiment."""

    def test_writes_artifacts(self, tiny_config, tmp_path: Path) -> None:
        """Test the output layout of a complete run."""
        summary = run_experiment(tiny_config, output_dir=tmp_path, workers=1)

        assert [seed.seed for seed in summary.seeds] == [3, 4]
        assert summary.evaluation_range == (15, 40)
        for seed in (3, 4):
            seed_dir = tmp_path / f"seed_{seed}"
            for name in ("gerost", "great"):
                for kind in ("metrics", "diagnostics", "roc"):
                    assert (seed_dir / f"{name}_{kind}.csv").exists()
            assert (seed_dir / "tracking_error.png").exists()
            assert (seed_dir / "roc.png").exists()
            assert (seed_dir / "gerost_radius.png").exists()
            assert not (seed_dir / "great_radius.png").exists()
            assert (seed_dir / "gerost_snapshot.png").exists()
            assert (seed_dir / "great_snapshot.png").exists()
            assert (seed_dir / "stream" / "observations.csv").exists()
            assert (seed_dir / "stream" / "masks.bin").exists()

        header = (tmp_path / "seed_3" / "gerost_metrics.csv").read_text().splitlines()[0]
        assert header.split(",") == METRIC_COLUMNS

    def test_summary_json(self, tiny_config, tmp_path: Path) -> None:
        """Test the machine-readable summary."""
        summary = run_experiment(tiny_config, output_dir=tmp_path, workers=1)
        data = json.loads((tmp_path / "summary.json").read_text())
        assert data["schema_version"] == "gerost-experiment/1"
        assert data["score_function"] == "abs_residual"
        assert data["n_thresholds"] == 256
        assert len(data["seeds"]) == 2

        for seed in summary.seeds:
            robust, nominal = seed.tracker("gerost"), seed.tracker("great")
            assert 0.0 <= robust.auc <= 1.0
            assert robust.auc == pytest.approx(robust.auc_exact, abs=0.02)
            assert robust.median_lambda_during_occlusion is not None
            assert nominal.median_lambda_during_occlusion is None
            assert nominal.beta_hat is None

    def test_reruns_are_identical(self, tiny_config, tmp_path: Path) -> None:
        """Test that artifacts depend on the configuration and seeds only."""
        run_experiment(tiny_config, output_dir=tmp_path / "a", workers=1)
        run_experiment(tiny_config, output_dir=tmp_path / "b", workers=1)
        first, second = _artifacts(tmp_path / "a"), _artifacts(tmp_path / "b")
        assert first.keys() == second.keys()
        assert first == second

    @pytest.mark.slow
    def test_process_pool_matches_sequential(self, tiny_config, tmp_path: Path) -> None:
        """Test that worker processes produce the same artifacts."""
        config = tiny_config.model_copy(update={"plots": False})
        run_experiment(config, output_dir=tmp_path / "seq", workers=1)
        run_experiment(config, output_dir=tmp_path / "par", workers=2)
        assert _artifacts(tmp_path / "seq") == _artifacts(tmp_path / "par")

    def test_snapshot_at_configured_frame(self, tiny_config) -> None:
        """Test that each tracker splits the chosen frame into background and residual."""
        evaluation = tiny_config.evaluation.model_copy(update={"snapshot_frame": 20})
        config = tiny_config.model_copy(update={"evaluation": evaluation})
        trial = run_trial(config, seed=3)
        for outcome in trial.outcomes:
            snap = outcome.snapshot
            assert snap is not None
            assert snap.t == 20
            assert snap.frame.shape == (36,)
            assert np.allclose(snap.background + snap.residual, snap.frame)

    def test_worker_count_is_capped_by_seeds(self, tiny_config, tmp_path: Path) -> None:
        """Test that no more workers than seeds are started."""
        assert ExperimentPipeline(tiny_config, tmp_path, workers=16).workers == 2
        assert ExperimentPipeline(tiny_config, tmp_path, workers=1).workers == 1


@pytest.mark.slow
class TestOcclusionStudy:
    """Occlusion study on the desk profile."""

    @pytest.fixture(scope="class")
    def study_dir(self, tmp_path_factory: pytest.TempPathFactory) -> Path:
        """Output directory of the desk study."""
        return tmp_path_factory.mktemp("desk")

    @pytest.fixture(scope="class")
    def summary(self, study_dir: Path):
        """Default desk experiment over five seeds."""
        config = default_experiment_config("desk").model_copy(update={"seeds": [1, 2, 3, 4, 5]})
        return run_experiment(config, output_dir=study_dir, workers=1)

    def test_robust_tracker_detects_better(self, summary) -> None:
        """Test the AUC ordering and the absolute floor of the robust tracker."""
        robust, nominal = summary.aucs("gerost"), summary.aucs("great")
        wins = sum(r >= g for r, g in zip(robust, nominal, strict=True))
        assert wins >= 4
        assert sum(robust) / len(robust) >= 0.90

    def test_multiplier_rises_under_occlusion(self, summary) -> None:
        """Test that lambda* sits near 2 before the occluder and rises with it."""
        for seed in summary.seeds:
            robust = seed.tracker("gerost")
            before = robust.median_lambda_before_occlusion
            during = robust.median_lambda_during_occlusion
            assert before is not None
            assert during is not None
            assert abs(before - 2.0) <= 0.05
            assert during > before

    def test_radius_flat_at_cap(self, summary, study_dir: Path) -> None:
        """Test that rho_t stays constant while the noise ratio sits at its cap."""
        config = default_experiment_config("desk")
        p_cap = config.trackers[0].radius.p_cap
        for seed in summary.seeds:
            frame = pd.read_csv(study_dir / f"seed_{seed.seed}" / "gerost_diagnostics.csv")
            occluded = frame[frame["t"] >= config.generator.occlusion_start]
            capped = occluded[np.isclose(occluded["p_bar_t"], p_cap, rtol=0.0, atol=1e-15)]
            assert not capped.empty
            assert np.ptp(capped["rho_t"].to_numpy()) <= 1e-12

    def test_shipped_config_runs(self, project_root: Path, tmp_path: Path) -> None:
        """Test the shipped desk experiment on a single seed."""
        config = load_experiment_config(project_root / "configs" / "desk_occlusion.toml")
        config = config.model_copy(update={"seeds": [1], "plots": False})
        summary = run_experiment(config, output_dir=tmp_path, workers=1)
        assert len(summary.seeds) == 1
