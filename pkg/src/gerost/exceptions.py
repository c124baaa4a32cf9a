"""Custom exceptions for robust subspace tracking.

This module defines a hierarchy of exceptions for the error conditions of
the geometry, inner maximization, tracking, evaluation and experiment layers.
Degenerate numerical events that a streaming tracker must survive are
reported as flags on result objects instead.
"""


class GerostError(Exception):
    """Base exception for the gerost package.

    All custom exceptions in this package inherit from this class,
    allowing for broad exception handling when needed.
    """


class DimensionError(GerostError):
    """Raised when array shapes or subspace dimensions are incompatible.

    Attributes:
        expected: Description of the expected shape or dimension.
        actual: Description of what was received.
    """

    def __init__(self, expected: object, actual: object, what: str = "dimension") -> None:
        """Initialize DimensionError.

        Args:
            expected: Expected shape or dimension.
            actual: Received shape or dimension.
            what: Name of the quantity being checked.
        """
        self.expected = expected
        self.actual = actual
        super().__init__(f"Incompatible {what}: expected {expected}, got {actual}")


class RankDeficiencyError(GerostError):
    """Raised when a matrix does not have the required column rank.

    Attributes:
        rank: Numerical rank found.
        required: Rank that was required.
    """

    def __init__(self, rank: int, required: int) -> None:
        """Initialize RankDeficiencyError.

        Args:
            rank: Numerical rank found.
            required: Rank that was required.
        """
        self.rank = rank
        self.required = required
        super().__init__(f"Rank deficient input: numerical rank {rank} < {required}")


class SymmetryError(GerostError):
    """Raised when a matrix expected to be symmetric is not.

    Attributes:
        asymmetry: Max absolute entry of ``M - Mᵀ``.
    """

    def __init__(self, asymmetry: float) -> None:
        """Initialize SymmetryError.

        Args:
            asymmetry: Max absolute entry of ``M - Mᵀ``.
        """
        self.asymmetry = asymmetry
        super().__init__(f"Matrix is not symmetric (max |M - Mᵀ| = {asymmetry:.3e})")


class DomainError(GerostError):
    """Raised when a scalar parameter lies outside its admissible range.

    Attributes:
        parameter: Name of the offending parameter.
        value: The rejected value.
    """

    def __init__(self, parameter: str, value: float, reason: str) -> None:
        """Initialize DomainError.

        Args:
            parameter: Name of the offending parameter.
            value: The rejected value.
            reason: Description of the admissible range.
        """
        self.parameter = parameter
        self.value = value
        super().__init__(f"{parameter}={value!r} out of range: {reason}")


class ConfigError(GerostError):
    """Raised when a configuration file or object is invalid.

    Attributes:
        field: Dotted path of the offending field (if known).
        line: Line number in the configuration file (if known).
    """

    def __init__(
        self,
        reason: str,
        field: str | None = None,
        line: int | None = None,
    ) -> None:
        """Initialize ConfigError.

        Args:
            reason: Description of the problem.
            field: Optional dotted field path.
            line: Optional line number in the source file.
        """
        self.field = field
        self.line = line
        location = []
        if line is not None:
            location.append(f"line {line}")
        if field:
            location.append(f"field '{field}'")
        prefix = f"Invalid configuration ({', '.join(location)})" if location else (
            "Invalid configuration"
        )
        super().__init__(f"{prefix}: {reason}")


class InsufficientDataError(GerostError):
    """Raised when an estimator has no usable samples."""


class DegenerateLabelsError(GerostError):
    """Raised when a detection evaluation sees only one class."""

    def __init__(self, reason: str = "Labels contain a single class") -> None:
        """Initialize DegenerateLabelsError.

        Args:
            reason: Description of the degeneracy.
        """
        super().__init__(reason)


class UnknownSuiteError(GerostError):
    """Raised when a property suite name is not registered.

    Attributes:
        suite: The requested suite name.
    """

    def __init__(self, suite: str, known: list[str]) -> None:
        """Initialize UnknownSuiteError.

        Args:
            suite: The requested suite name.
            known: Registered suite names.
        """
        self.suite = suite
        super().__init__(f"Unknown property suite '{suite}' (known: {', '.join(known)})")


class OutputError(GerostError):
    """Raised when experiment artifacts cannot be written.

    Attributes:
        path: Path that could not be written.
    """

    def __init__(self, path: str, message: str = "Failed to write output") -> None:
        """Initialize OutputError.

        Args:
            path: Path that could not be written.
            message: Error message prefix.
        """
        self.path = path
        super().__init__(f"{message}: {path}")


class StreamLoadError(GerostError):
    """Raised when an exported stream file cannot be read back.

    Attributes:
        file_path: Path to the file that failed to load.
    """

    def __init__(self, file_path: str, message: str = "Failed to load stream") -> None:
        """Initialize StreamLoadError.

        Args:
            file_path: Path to the file that failed to load.
            message: Error message prefix.
        """
        self.file_path = file_path
        super().__init__(f"{message}: {file_path}")
