"""kld.errors

Exceptions raised by the kld modules. Every error carries the exit code the
command line maps it to.
"""

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INVARIANT = 3


class KLDError(Exception):
    """Root of the kld error hierarchy."""

    exit_code = EXIT_DATA


class ConfigError(KLDError, ValueError):
    """Invalid parameter value or configuration file content."""

    exit_code = EXIT_USAGE


class DataError(KLDError, ValueError):
    """Input data violates a precondition of the pipeline."""

    exit_code = EXIT_DATA


class StreamFormatError(DataError):
    """Malformed stream file or record.

    ``record`` is the 1-based record number (header excluded) when the
    failure can be attributed to a single record.
    """

    def __init__(self, message, record=None):
        if record is not None:
            message = f"record {record}: {message}"
        super().__init__(message)
        self.record = record


class GridError(DataError):
    """Grid construction or point location failed."""


class PmfError(DataError):
    """Invalid probability vector or smoothing constant."""


class DivergenceError(DataError):
    """KL divergence called with incompatible arguments."""


class NoOverlapError(DivergenceError):
    """Two chunks share no occupied bin, so they cannot be compared."""

    def __init__(self, message="no overlapping occupied bins"):
        super().__init__(message)


class SeriesError(DataError):
    """Smoothing or differentiation of a too short series."""


class GeneratorError(DataError):
    """Synthetic stream generation failed."""


class EvaluationError(DataError):
    """Matching or sweep inputs are unusable."""


class InvariantViolation(KLDError, AssertionError):
    """An internal invariant did not hold; this is a bug, not bad input."""

    exit_code = EXIT_INVARIANT
