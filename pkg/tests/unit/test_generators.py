"""Unit tests for synthetic stream generation."""

import math

import numpy as np
import pytest
from pydantic import ValidationError

from gerost.data.generators import (
    PROFILES,
    GeneratorProfile,
    OcclusionSpec,
    drift_sequence,
    frame_at,
    generate_stream,
    make_rotating_model,
)
from gerost.exceptions import DimensionError, DomainError
from gerost.manifold.grassmann import chordal_distance, projector_distance


@pytest.fixture
def occlusion() -> OcclusionSpec:
    """A 3x3 square on a 5x4 frame starting at frame 3."""
    return OcclusionSpec(
        frame_shape=(5, 4),
        start_frame=3,
        square_size=3,
        intensity=2.0,
        walk_step=1,
        seed=9,
    )


class TestRotatingModel:
    """Tests for make_rotating_model and RotatingSubspaceModel."""

    def test_basis_at_zero_is_u0(self, small_model) -> None:
        """Test that the rotation starts at U0."""
        assert np.allclose(small_model.basis_at(0), small_model.u0)

    def test_truth_is_orthonormal(self, small_model) -> None:
        """Test that every ground-truth basis is orthonormal."""
        for t in range(0, 40, 7):
            basis = small_model.basis_at(t)
            assert np.allclose(basis.T @ basis, np.eye(2), atol=1e-12)

    def test_theta_follows_sine(self, small_model) -> None:
        """Test the angle schedule at a quarter period."""
        assert small_model.theta(10) == pytest.approx(0.3)

    def test_distance_to_start(self, small_model) -> None:
        """Test that all k principal angles to U0 equal theta_t."""
        angle = small_model.theta(5)
        expected = math.sqrt(2.0) * abs(math.sin(angle))
        assert chordal_distance(small_model.subspace_at(5), small_model.subspace_at(0)) == (
            pytest.approx(expected, abs=1e-12)
        )

    def test_same_seed_same_model(self) -> None:
        """Test that the model is a function of its seed."""
        a = make_rotating_model(16, 2, 0.2, 30, 1.0, 0.0, seed=4)
        b = make_rotating_model(16, 2, 0.2, 30, 1.0, 0.0, seed=4)
        assert np.array_equal(a.u0, b.u0)

    def test_rank_too_large_raises(self) -> None:
        """Test that 2k must fit in the ambient space."""
        with pytest.raises(DimensionError):
            make_rotating_model(5, 3, 0.2, 30, 1.0, 0.0, seed=0)

    def test_amplitude_out_of_range_raises(self) -> None:
        """Test that the amplitude stays below pi/2."""
        with pytest.raises(DomainError):
            make_rotating_model(16, 2, math.pi / 2, 30, 1.0, 0.0, seed=0)

    def test_drift_sequence(self, small_model) -> None:
        """Test the per-step drift of a full period."""
        drift = drift_sequence(small_model)
        assert drift.shape == (small_model.period,)
        assert np.all(drift >= 0.0)
        assert drift.max() < 0.1

    def test_zero_amplitude_has_no_drift(self) -> None:
        """Test that a static model never moves."""
        model = make_rotating_model(16, 2, 0.0, 30, 1.0, 0.0, seed=2)
        assert np.all(drift_sequence(model) <= 1e-12)

    def test_drift_mirrors_over_the_period(self) -> None:
        """Test that the step starting at t matches the step ending at N - t."""
        model = make_rotating_model(16, 2, 0.3, 40, 1.0, 0.0, seed=3)
        drift = drift_sequence(model)
        period = model.period
        for t in range(period):
            assert abs(drift[t] - drift[period - 1 - t]) <= 1e-9

    def test_drift_scales_with_small_amplitude(self) -> None:
        """Test that doubling a small amplitude doubles the largest drift."""
        small = drift_sequence(make_rotating_model(16, 2, 0.01, 40, 1.0, 0.0, seed=5))
        large = drift_sequence(make_rotating_model(16, 2, 0.02, 40, 1.0, 0.0, seed=5))
        assert large.max() / small.max() == pytest.approx(2.0, rel=0.05)


class TestOcclusion:
    """Tests for OcclusionSpec."""

    def test_no_mask_before_start(self, occlusion) -> None:
        """Test that frames before the start are clean."""
        assert occlusion.position_at(2) is None
        assert not occlusion.mask_at(2).any()

    def test_square_pixel_count(self, occlusion) -> None:
        """Test that the mask covers exactly the square."""
        for t in range(3, 12):
            assert int(occlusion.mask_at(t).sum()) == 9

    def test_walk_steps_are_bounded(self, occlusion) -> None:
        """Test that consecutive positions move by at most walk_step."""
        positions = [occlusion.position_at(t) for t in range(3, 30)]
        for (r0, c0), (r1, c1) in zip(positions, positions[1:], strict=False):
            assert abs(r1 - r0) <= 1
            assert abs(c1 - c0) <= 1

    def test_positions_stay_inside(self, occlusion) -> None:
        """Test that the square never leaves the frame."""
        for t in range(3, 100):
            row, col = occlusion.position_at(t)
            assert 0 <= row <= 2
            assert 0 <= col <= 1

    def test_walk_is_prefix_stable(self, occlusion) -> None:
        """Test that asking for later frames does not change earlier ones."""
        early = occlusion.position_at(5)
        occlusion.position_at(500)
        assert occlusion.position_at(5) == early

    def test_square_too_large_raises(self) -> None:
        """Test that the square must fit in the frame."""
        with pytest.raises(DomainError):
            OcclusionSpec((4, 4), 0, 5, 1.0, 1, 0)


class TestStreams:
    """Tests for frame_at and generate_stream."""

    def test_frame_is_deterministic(self, small_model) -> None:
        """Test that a frame depends on the seed and t only."""
        first = frame_at(small_model, None, 7)
        again = frame_at(small_model, None, 7)
        assert np.array_equal(first.observation, again.observation)
        assert projector_distance(first.truth_subspace, small_model.subspace_at(7)) <= 1e-12

    def test_clean_frame_near_truth(self, small_model) -> None:
        """Test that a clean frame is the subspace signal plus small noise."""
        frame = frame_at(small_model, None, 4)
        residual = frame.truth_subspace.residual(frame.observation)
        assert np.linalg.norm(residual) < 0.1
        assert not frame.foreground_mask.any()

    def test_occluded_pixels_brightened(self) -> None:
        """Test that the occluder adds its intensity to masked pixels."""
        model = make_rotating_model(20, 2, 0.2, 30, 1.0, 0.0, seed=1)
        occlusion = OcclusionSpec((5, 4), 1, 2, 3.0, 1, 2)
        clean = frame_at(model, None, 4)
        occluded = frame_at(model, occlusion, 4)
        difference = occluded.observation - clean.observation
        assert np.allclose(difference, 3.0 * occluded.foreground_mask)

    def test_negative_time_raises(self, small_model) -> None:
        """Test that frame indices are non-negative."""
        with pytest.raises(DomainError):
            frame_at(small_model, None, -1)

    def test_frame_size_mismatch_raises(self, small_model) -> None:
        """Test that the occluder frame must match n."""
        occlusion = OcclusionSpec((4, 4), 1, 2, 1.0, 1, 0)
        with pytest.raises(DimensionError):
            frame_at(small_model, occlusion, 3)

    def test_stream_layout(self) -> None:
        """Test shapes and alignment of a generated stream."""
        model = make_rotating_model(20, 2, 0.2, 30, 1.0, 0.01, seed=1)
        occlusion = OcclusionSpec((5, 4), 5, 2, 3.0, 1, 2)
        stream = generate_stream(model, occlusion, 10)
        assert len(stream) == 10
        assert list(stream.times) == list(range(1, 11))
        assert stream.observations.shape == (10, 20)
        assert stream.masks.shape == (10, 20)
        assert not stream.masks[:4].any()
        assert stream.masks[4:].any(axis=1).all()
        assert len(stream.truths) == 10


class TestGeneratorProfile:
    """Tests for GeneratorProfile and the built-in profiles."""

    def test_desk_profile(self) -> None:
        """Test the desk-scale profile."""
        desk = PROFILES["desk"]
        assert desk.n == 1024
        assert desk.period == 120
        assert desk.occlusion_start == 21
        assert desk.square_size == 6

    def test_named_profile_is_merged(self) -> None:
        """Test that a named profile fills unspecified fields."""
        profile = GeneratorProfile.model_validate({"name": "desk", "period": 60})
        assert profile.period == 60
        assert profile.frame_height == 32

    def test_build_uses_shifted_occluder_seed(self) -> None:
        """Test that the occluder walk is seeded independently of the model."""
        model, occlusion = PROFILES["desk"].build(seed=5)
        assert model.seed == 5
        assert occlusion.seed == 6
        assert occlusion.n == model.n

    def test_eps_estimate(self) -> None:
        """Test the three-sigma noise bound."""
        assert PROFILES["desk"].eps_estimate() == pytest.approx(0.96)

    def test_square_must_fit(self) -> None:
        """Test that an oversized occluder is rejected."""
        with pytest.raises(ValidationError):
            GeneratorProfile.model_validate({"name": "desk", "square_size": 40})
