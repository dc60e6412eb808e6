"""Exception classes shared across the package.

The CLI maps these onto exit codes: data problems exit 1, configuration
problems exit 2, degenerate calibration training exits 3.
"""


class ContrarankError(Exception):
    """Base class for all package errors."""


class RecordParseError(ContrarankError):
    """A record line could not be parsed as JSON. Carries the line number."""

    def __init__(self, line_no: int, message: str):
        self.line_no = line_no
        super().__init__(f"line {line_no}: {message}")


class RecordIntegrityError(ContrarankError):
    """Cross-record constraint violated (e.g. duplicate question ids)."""


class RecordValidationError(ContrarankError):
    """A record violates one or more structural invariants."""

    def __init__(self, message: str, violations: list[str] | None = None):
        self.violations = violations or []
        super().__init__(message)


class InputError(ContrarankError):
    """An operation was called with inconsistent or out-of-contract inputs."""


class ConfigError(ContrarankError):
    """Bad CLI or run configuration."""


class DegenerateTrainingError(ContrarankError):
    """Calibration training data cannot identify a model (e.g. one class only)."""
