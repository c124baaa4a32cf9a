"""Reading and writing observation matrices.

Streams are stored as one matrix per file with one frame per row. Two
formats are supported:

* CSV written with pandas at 17 significant digits, so values read back
  bit-identical;
* a binary format with a 16-byte header (8-byte magic ``GEROSTv1``, uint32
  n, uint32 N) followed by little-endian float64 values in row-major order.
"""

import logging
from pathlib import Path
from typing import TYPE_CHECKING, Literal

import numpy as np
import pandas as pd

from gerost.config import settings
from gerost.exceptions import OutputError, StreamLoadError


if TYPE_CHECKING:
    from numpy.typing import NDArray

    from gerost.data.generators import LabeledStream

_logger = logging.getLogger(__name__)

StreamFormat = Literal["csv", "bin"]

MAGIC = b"GEROSTv1"
HEADER_DTYPE = np.dtype([("magic", "S8"), ("n", "<u4"), ("frames", "<u4")])


def _as_matrix(matrix: "NDArray[np.float64]") -> "NDArray[np.float64]":
    values = np.asarray(matrix, dtype=np.float64)
    if values.ndim == 1:
        values = values[np.newaxis, :]
    return values


def write_matrix_csv(
    path: Path | str,
    matrix: "NDArray[np.float64]",
    float_format: str | None = None,
) -> Path:
    """Write a matrix to CSV, one row per frame.

    Args:
        path: Destination file.
        matrix: Array of shape (N, n).
        float_format: printf-style format; defaults to ``settings.float_format``.

    Returns:
        The written path.

    Raises:
        OutputError: If the file cannot be written.
    """
    path = Path(path)
    values = _as_matrix(matrix)
    frame = pd.DataFrame(values, columns=[f"x{j}" for j in range(values.shape[1])])
    try:
        frame.to_csv(path, index=False, float_format=float_format or settings.float_format)
    except OSError as e:
        raise OutputError(str(path), f"Failed to write CSV: {e}") from e
    return path


def read_matrix_csv(path: Path | str) -> "NDArray[np.float64]":
    """Read a matrix written by ``write_matrix_csv``.

    Raises:
        StreamLoadError: If the file is missing or malformed.
    """
    path = Path(path)
    if not path.exists():
        raise StreamLoadError(str(path), "Stream file not found")
    try:
        frame = pd.read_csv(path, float_precision="round_trip")
    except Exception as e:
        raise StreamLoadError(str(path), f"Failed to parse CSV: {e}") from e
    if frame.isna().to_numpy().any():
        raise StreamLoadError(str(path), "CSV contains missing values")
    return frame.to_numpy(dtype=np.float64)


def write_matrix_bin(path: Path | str, matrix: "NDArray[np.float64]") -> Path:
    """Write a matrix in the binary stream format.

    Raises:
        OutputError: If the file cannot be written.
    """
    path = Path(path)
    values = _as_matrix(matrix)
    frames, n = values.shape
    header = np.array([(MAGIC, n, frames)], dtype=HEADER_DTYPE)
    try:
        with path.open("wb") as handle:
            handle.write(header.tobytes())
            handle.write(values.astype("<f8").tobytes(order="C"))
    except OSError as e:
        raise OutputError(str(path), f"Failed to write binary stream: {e}") from e
    return path


def read_matrix_bin(path: Path | str) -> "NDArray[np.float64]":
    """Read a matrix written by ``write_matrix_bin``.

    Raises:
        StreamLoadError: If the file is missing, truncated or not a stream.
    """
    path = Path(path)
    if not path.exists():
        raise StreamLoadError(str(path), "Stream file not found")
    raw = path.read_bytes()
    if len(raw) < HEADER_DTYPE.itemsize:
        raise StreamLoadError(str(path), "File shorter than header")
    header = np.frombuffer(raw[: HEADER_DTYPE.itemsize], dtype=HEADER_DTYPE)[0]
    if bytes(header["magic"]) != MAGIC:
        raise StreamLoadError(str(path), "Bad magic bytes")
    n, frames = int(header["n"]), int(header["frames"])
    payload = np.frombuffer(raw[HEADER_DTYPE.itemsize :], dtype="<f8")
    if payload.size != n * frames:
        raise StreamLoadError(
            str(path),
            f"Payload holds {payload.size} values, header announces {n * frames}",
        )
    return payload.reshape(frames, n).astype(np.float64)


def read_matrix(path: Path | str) -> "NDArray[np.float64]":
    """Read a matrix, picking the format from the file suffix."""
    path = Path(path)
    if path.suffix == ".bin":
        return read_matrix_bin(path)
    return read_matrix_csv(path)


def export_stream(
    stream: "LabeledStream",
    out_dir: Path | str,
    fmt: StreamFormat = "csv",
) -> dict[str, Path]:
    """Write observations and masks of a stream into ``out_dir``.

    Returns:
        Mapping from artifact name to written path.

    Raises:
        OutputError: If the directory or files cannot be written.
    """
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise OutputError(str(out_dir), f"Failed to create directory: {e}") from e

    writer = write_matrix_bin if fmt == "bin" else write_matrix_csv
    paths = {
        "observations": writer(out_dir / f"observations.{fmt}", stream.observations),
        "masks": writer(out_dir / f"masks.{fmt}", stream.masks.astype(np.float64)),
    }
    _logger.info("Exported %d frames to %s", len(stream), out_dir)
    return paths


def get_stream_statistics(observations: "NDArray[np.float64]") -> dict[str, float | int]:
    """Compute summary statistics of an observation matrix.

    Example:
        >>> stats = get_stream_statistics(stream.observations)
        >>> print(f"Frames: {stats['n_frames']}, pixels: {stats['n_pixels']}")
    """
    values = _as_matrix(observations)
    return {
        "n_frames": int(values.shape[0]),
        "n_pixels": int(values.shape[1]),
        "x_min": float(values.min()),
        "x_max": float(values.max()),
        "x_mean": float(values.mean()),
        "x_std": float(values.std()),
    }
