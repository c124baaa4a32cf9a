"""Unit tests for Grassmann manifold primitives."""

import math

import numpy as np
import pytest

from gerost.config import TOLERANCES
from gerost.exceptions import DimensionError, DomainError, RankDeficiencyError, SymmetryError
from gerost.manifold.grassmann import (
    SubspacePoint,
    TangentVector,
    chordal_distance,
    exp_map,
    lowrank_top_eigenspace,
    orthonormalize,
    principal_angles,
    projector_distance,
    riemannian_gradient,
    sample_ball_boundary,
    sample_ball_interior,
    top_eigenspace,
)


class TestSubspacePoint:
    """Tests for SubspacePoint."""

    def test_dimensions(self) -> None:
        """Test ambient and subspace dimensions."""
        point = SubspacePoint(np.eye(5)[:, :2])
        assert point.ambient_dim == 5
        assert point.sub_dim == 2

    def test_rejects_non_orthonormal_basis(self) -> None:
        """Test that a scaled basis is rejected."""
        with pytest.raises(DomainError):
            SubspacePoint(2.0 * np.eye(3)[:, :2])

    def test_rejects_one_dimensional_array(self) -> None:
        """Test that a vector is not accepted as a basis."""
        with pytest.raises(DimensionError):
            SubspacePoint(np.array([1.0, 0.0]))

    def test_basis_is_read_only(self) -> None:
        """Test that the stored basis cannot be mutated."""
        point = SubspacePoint(np.eye(3)[:, :1])
        with pytest.raises(ValueError, match="read-only"):
            point.basis[0, 0] = 2.0

    def test_residual_annihilates_range(self, random_subspace) -> None:
        """Test that the complementary projector removes the subspace."""
        point = random_subspace(8, 3, 1)
        assert np.allclose(point.residual(point.basis), 0.0, atol=1e-12)


class TestOrthonormalize:
    """Tests for orthonormalize function."""

    def test_preserves_column_space(self, rng) -> None:
        """Test that mixing the columns does not change the subspace."""
        raw = rng.standard_normal((10, 3))
        mixed = raw @ rng.standard_normal((3, 3))
        assert projector_distance(orthonormalize(raw), orthonormalize(mixed)) <= 1e-10

    def test_vector_becomes_line(self) -> None:
        """Test that a 1-D input yields a one-dimensional subspace."""
        point = orthonormalize(np.array([3.0, 4.0]))
        assert point.sub_dim == 1
        assert np.allclose(np.abs(point.basis[:, 0]), [0.6, 0.8])

    def test_rank_deficient_raises(self) -> None:
        """Test that repeated columns are rejected."""
        raw = np.ones((4, 2))
        with pytest.raises(RankDeficiencyError):
            orthonormalize(raw)

    def test_too_many_columns_raises(self) -> None:
        """Test that k > n is rejected."""
        with pytest.raises(DimensionError):
            orthonormalize(np.ones((2, 3)))


class TestChordalDistance:
    """Tests for chordal_distance and principal_angles."""

    def test_zero_for_same_subspace(self, random_subspace) -> None:
        """Test that a subspace has distance zero to itself."""
        point = random_subspace(12, 4, 2)
        assert chordal_distance(point, point) <= 1e-12

    def test_symmetric(self, random_subspace) -> None:
        """Test symmetry, also for different subspace dimensions."""
        a = random_subspace(12, 2, 3)
        b = random_subspace(12, 4, 4)
        assert chordal_distance(a, b) == pytest.approx(chordal_distance(b, a), abs=1e-12)

    def test_orthogonal_lines(self, coordinate_subspace) -> None:
        """Test that span(e1) and span(e2) are at distance 1."""
        assert chordal_distance(
            coordinate_subspace(2, [0]),
            coordinate_subspace(2, [1]),
        ) == pytest.approx(1.0)

    def test_nested_subspaces(self, coordinate_subspace) -> None:
        """Test that nesting contributes only the dimension difference."""
        small = coordinate_subspace(4, [0])
        big = coordinate_subspace(4, [0, 1, 2])
        assert chordal_distance(small, big) == pytest.approx(math.sqrt(2.0))

    def test_orthogonal_planes(self, coordinate_subspace) -> None:
        """Test the maximal distance between orthogonal planes."""
        a = coordinate_subspace(4, [0, 1])
        b = coordinate_subspace(4, [2, 3])
        assert chordal_distance(a, b) == pytest.approx(math.sqrt(2.0))

    def test_matches_principal_angles(self, random_subspace) -> None:
        """Test that the distance equals the root sum of squared sines."""
        a = random_subspace(10, 3, 5)
        b = random_subspace(10, 3, 6)
        angles = principal_angles(a, b).angles
        expected = math.sqrt(float(np.sum(np.sin(angles) ** 2)))
        assert chordal_distance(a, b) == pytest.approx(expected, abs=1e-10)

    def test_rotated_line_angle(self) -> None:
        """Test that a line rotated by theta has principal angle theta."""
        theta = 0.3
        a = SubspacePoint(np.array([[1.0], [0.0]]))
        b = SubspacePoint(np.array([[math.cos(theta)], [math.sin(theta)]]))
        result = principal_angles(a, b)
        assert result.angles[0] == pytest.approx(theta, abs=1e-12)
        assert result.dims == (1, 1)

    def test_ambient_mismatch_raises(self, random_subspace) -> None:
        """Test that subspaces of different ambient spaces are rejected."""
        with pytest.raises(DimensionError):
            chordal_distance(random_subspace(5, 2, 0), random_subspace(6, 2, 0))


class TestTopEigenspace:
    """Tests for top_eigenspace and lowrank_top_eigenspace."""

    def test_diagonal_matrix(self, coordinate_subspace) -> None:
        """Test the leading coordinate axes of a diagonal matrix."""
        space = top_eigenspace(np.diag([3.0, 2.0, 1.0]), 2)
        assert projector_distance(space.basis, coordinate_subspace(3, [0, 1])) <= 1e-12
        assert space.gap_at_d == pytest.approx(1.0)
        assert list(space.eigenvalues) == pytest.approx([3.0, 2.0, 1.0])
        assert not space.degenerate

    def test_degenerate_gap_is_flagged(self) -> None:
        """Test that a repeated eigenvalue at the cut is reported."""
        space = top_eigenspace(np.diag([1.0, 1.0, 0.0]), 1)
        assert space.degenerate

    def test_asymmetric_raises(self) -> None:
        """Test that a non-symmetric matrix is rejected."""
        with pytest.raises(SymmetryError):
            top_eigenspace(np.array([[1.0, 1.0], [0.0, 1.0]]), 1)

    def test_d_out_of_range_raises(self) -> None:
        """Test that d must be below n."""
        with pytest.raises(DomainError):
            top_eigenspace(np.eye(3), 3)

    def test_lowrank_matches_dense(self, random_subspace) -> None:
        """Test that the Gram path reproduces the dense eigenspace."""
        center = random_subspace(12, 3, 10)
        estimate = random_subspace(12, 2, 11)
        lam = 2.5
        dense = top_eigenspace(lam * center.projector() - estimate.projector(), 3)
        lowrank = lowrank_top_eigenspace([(lam, center), (-1.0, estimate)], 3)
        assert projector_distance(dense.basis, lowrank.basis) <= 1e-8
        assert np.allclose(dense.eigenvalues, lowrank.eigenvalues, atol=1e-8)

    def test_lowrank_completes_with_null_space(self, coordinate_subspace) -> None:
        """Test that zero eigenvectors are supplied when d exceeds the positive part."""
        line = coordinate_subspace(5, [0])
        space = lowrank_top_eigenspace([(1.0, line)], 3)
        assert space.basis.sub_dim == 3
        assert np.linalg.norm(line.residual(space.basis.basis[:, :1])) <= 1e-12


class TestTangentSpace:
    """Tests for riemannian_gradient and exp_map."""

    def test_gradient_projection_example(self, coordinate_subspace) -> None:
        """Test the projection of (1, 1) at span(e1) in R^2."""
        line = coordinate_subspace(2, [0])
        tangent = riemannian_gradient(line, np.array([[1.0], [1.0]]))
        assert np.allclose(tangent.direction, [[0.0], [1.0]])

    def test_gradient_in_range_vanishes(self, random_subspace) -> None:
        """Test that a gradient inside the subspace projects to zero."""
        point = random_subspace(6, 2, 1)
        tangent = riemannian_gradient(point, point.basis @ np.array([[1.0, 2.0], [3.0, 4.0]]))
        assert tangent.norm <= 1e-12

    def test_non_horizontal_rejected(self, coordinate_subspace) -> None:
        """Test that a vertical direction is not a tangent vector."""
        line = coordinate_subspace(2, [0])
        with pytest.raises(DomainError):
            TangentVector(line, np.array([[1.0], [0.0]]))

    def test_exp_map_zero_step(self, random_subspace) -> None:
        """Test that a zero step returns the base point."""
        point = random_subspace(6, 2, 2)
        tangent = riemannian_gradient(point, np.ones((6, 2)))
        assert exp_map(tangent, 0.0) is point

    def test_exp_map_rotates_line(self, coordinate_subspace) -> None:
        """Test the geodesic of a line in the plane."""
        line = coordinate_subspace(2, [0])
        tangent = TangentVector(line, np.array([[0.0], [1.0]]))
        moved = exp_map(tangent, math.pi / 4)
        assert chordal_distance(moved, line) == pytest.approx(math.sin(math.pi / 4))
        assert np.allclose(np.abs(moved.basis[:, 0]), [math.sqrt(0.5), math.sqrt(0.5)])


class TestBallSampling:
    """Tests for sample_ball_boundary and sample_ball_interior."""

    @pytest.mark.parametrize("seed", [0, 1, 2, 3])
    def test_boundary_hits_radius(self, random_subspace, seed: int) -> None:
        """Test that boundary samples lie at the requested distance."""
        center = random_subspace(10, 3, seed)
        sample = sample_ball_boundary(center, 0.4, seed)
        assert abs(chordal_distance(sample, center) - 0.4) <= 1e-6

    def test_boundary_within_sample_tolerance(self, random_subspace) -> None:
        """Test that seeded boundary samples meet the configured tolerance."""
        center = random_subspace(12, 3, 40)
        misses = [
            abs(chordal_distance(sample_ball_boundary(center, 0.3, seed), center) - 0.3)
            for seed in range(100)
        ]
        assert max(misses) <= TOLERANCES.ball_sample_tol

    def test_missed_boundary_raises(self, random_subspace, mocker) -> None:
        """Test that a root finder landing off the boundary is rejected."""
        mocker.patch("gerost.manifold.grassmann.brentq", return_value=0.0)
        with pytest.raises(DomainError, match="missed"):
            sample_ball_boundary(random_subspace(10, 3, 0), 0.4, 0)

    def test_interior_within_radius(self, random_subspace) -> None:
        """Test that interior samples never leave the ball."""
        center = random_subspace(10, 2, 5)
        for seed in range(5):
            sample = sample_ball_interior(center, 0.3, seed)
            assert chordal_distance(sample, center) <= 0.3 + 1e-6

    def test_radius_at_sqrt_k_raises(self, random_subspace) -> None:
        """Test that the radius must stay below sqrt(k)."""
        with pytest.raises(DomainError):
            sample_ball_boundary(random_subspace(10, 2, 0), math.sqrt(2.0))
