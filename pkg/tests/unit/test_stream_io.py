"""Unit tests for stream file input and output."""

from pathlib import Path

import numpy as np
import pytest

from gerost.data.generators import generate_stream, make_rotating_model
from gerost.data.stream_io import (
    HEADER_DTYPE,
    MAGIC,
    export_stream,
    get_stream_statistics,
    read_matrix,
    read_matrix_bin,
    read_matrix_csv,
    write_matrix_bin,
    write_matrix_csv,
)
from gerost.exceptions import StreamLoadError


@pytest.fixture
def matrix(rng: np.random.Generator) -> np.ndarray:
    """Awkward floats that need all 17 digits."""
    return rng.standard_normal((4, 6)) / 3.0


class TestCsvFormat:
    """Tests for write_matrix_csv and read_matrix_csv."""

    def test_values_read_back_exactly(self, tmp_path: Path, matrix: np.ndarray) -> None:
        """Test that 17 significant digits reproduce every bit."""
        path = write_matrix_csv(tmp_path / "m.csv", matrix)
        assert np.array_equal(read_matrix_csv(path), matrix)

    def test_vector_is_single_row(self, tmp_path: Path) -> None:
        """Test that a 1-D input is stored as one frame."""
        path = write_matrix_csv(tmp_path / "v.csv", np.array([1.0, 2.0, 3.0]))
        assert read_matrix_csv(path).shape == (1, 3)

    def test_missing_file_raises(self, tmp_path: Path) -> None:
        """Test that a missing file raises StreamLoadError."""
        with pytest.raises(StreamLoadError, match="not found"):
            read_matrix_csv(tmp_path / "absent.csv")

    def test_missing_values_raise(self, tmp_path: Path) -> None:
        """Test that empty cells are rejected."""
        path = tmp_path / "holes.csv"
        path.write_text("x0,x1\n1.0,\n2.0,3.0\n", encoding="utf-8")
        with pytest.raises(StreamLoadError, match="missing values"):
            read_matrix_csv(path)


class TestBinaryFormat:
    """Tests for write_matrix_bin and read_matrix_bin."""

    def test_values_read_back_exactly(self, tmp_path: Path, matrix: np.ndarray) -> None:
        """Test the binary format is lossless."""
        path = write_matrix_bin(tmp_path / "m.bin", matrix)
        assert np.array_equal(read_matrix_bin(path), matrix)

    def test_header_layout(self, tmp_path: Path, matrix: np.ndarray) -> None:
        """Test magic, n and N in the 16-byte header."""
        raw = write_matrix_bin(tmp_path / "m.bin", matrix).read_bytes()
        assert HEADER_DTYPE.itemsize == 16
        assert raw[:8] == MAGIC
        assert int.from_bytes(raw[8:12], "little") == 6
        assert int.from_bytes(raw[12:16], "little") == 4
        assert len(raw) == 16 + 8 * matrix.size

    def test_truncated_payload_raises(self, tmp_path: Path, matrix: np.ndarray) -> None:
        """Test that a cut-off file is detected."""
        path = write_matrix_bin(tmp_path / "m.bin", matrix)
        path.write_bytes(path.read_bytes()[:-8])
        with pytest.raises(StreamLoadError, match="Payload"):
            read_matrix_bin(path)

    def test_short_file_raises(self, tmp_path: Path) -> None:
        """Test that a file shorter than the header is rejected."""
        path = tmp_path / "short.bin"
        path.write_bytes(MAGIC)
        with pytest.raises(StreamLoadError, match="header"):
            read_matrix_bin(path)

    def test_bad_magic_raises(self, tmp_path: Path, matrix: np.ndarray) -> None:
        """Test that foreign files are rejected."""
        path = write_matrix_bin(tmp_path / "m.bin", matrix)
        path.write_bytes(b"NOTASTRM" + path.read_bytes()[8:])
        with pytest.raises(StreamLoadError, match="magic"):
            read_matrix_bin(path)

    def test_read_matrix_dispatches_on_suffix(self, tmp_path: Path, matrix: np.ndarray) -> None:
        """Test that read_matrix picks the reader from the suffix."""
        binary = write_matrix_bin(tmp_path / "m.bin", matrix)
        text = write_matrix_csv(tmp_path / "m.csv", matrix)
        assert np.array_equal(read_matrix(binary), read_matrix(text))


class TestExportStream:
    """Tests for export_stream and get_stream_statistics."""

    @pytest.mark.parametrize("fmt", ["csv", "bin"])
    def test_export_writes_observations_and_masks(self, tmp_path: Path, fmt: str) -> None:
        """Test that both matrices are written and read back."""
        model = make_rotating_model(12, 2, 0.2, 20, 1.0, 0.01, seed=0)
        stream = generate_stream(model, None, 5)
        paths = export_stream(stream, tmp_path / "out", fmt)
        assert set(paths) == {"observations", "masks"}
        assert paths["observations"].suffix == f".{fmt}"
        assert np.array_equal(read_matrix(paths["observations"]), stream.observations)
        assert read_matrix(paths["masks"]).shape == (5, 12)

    def test_statistics_keys(self, matrix: np.ndarray) -> None:
        """Test the reported statistics."""
        stats = get_stream_statistics(matrix)
        assert stats["n_frames"] == 4
        assert stats["n_pixels"] == 6
        assert stats["x_min"] <= stats["x_mean"] <= stats["x_max"]
        assert stats["x_std"] >= 0
