"""Grassmann manifold geometry.

This subpackage provides subspace points, principal angles, the chordal
distance, top eigenspaces and the exponential map used by the trackers.
"""

from gerost.manifold.grassmann import (
    Eigenspace,
    PrincipalAngleSet,
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


__all__ = [
    "Eigenspace",
    "PrincipalAngleSet",
    "SubspacePoint",
    "TangentVector",
    "chordal_distance",
    "exp_map",
    "lowrank_top_eigenspace",
    "orthonormalize",
    "principal_angles",
    "projector_distance",
    "riemannian_gradient",
    "sample_ball_boundary",
    "sample_ball_interior",
    "top_eigenspace",
]
