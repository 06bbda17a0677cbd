"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Invalid problem, set, schedule, or run configuration."""


class NumericError(ValueError):
    """Non-finite value encountered where a finite one is required."""


class IngestionError(ValueError):
    """Malformed input data (CSV corpus, results file)."""


class DiagnosticUnavailable(RuntimeError):
    """Requested diagnostic needs information the problem does not expose."""
