"""Synthetic streams and stream storage.

This subpackage provides the rotating-subspace generator with moving
occlusions, named generator profiles, and CSV/binary stream I/O.
"""

from gerost.data.generators import (
    PROFILES,
    GeneratorProfile,
    LabeledFrame,
    LabeledStream,
    OcclusionSpec,
    RotatingSubspaceModel,
    drift_sequence,
    frame_at,
    generate_stream,
    make_rotating_model,
)
from gerost.data.stream_io import (
    export_stream,
    get_stream_statistics,
    read_matrix,
    read_matrix_bin,
    read_matrix_csv,
    write_matrix_bin,
    write_matrix_csv,
)


__all__ = [
    "PROFILES",
    "GeneratorProfile",
    "LabeledFrame",
    "LabeledStream",
    "OcclusionSpec",
    "RotatingSubspaceModel",
    "drift_sequence",
    "export_stream",
    "frame_at",
    "generate_stream",
    "get_stream_statistics",
    "make_rotating_model",
    "read_matrix",
    "read_matrix_bin",
    "read_matrix_csv",
    "write_matrix_bin",
    "write_matrix_csv",
]
