"""Exception types raised across the toolkit."""


class FairminerError(Exception):
    """Base class for all toolkit errors."""


class SchemaError(FairminerError):
    """Invalid feature schema, lexicon, or binning definition."""


class DataError(FairminerError):
    """Malformed or out-of-domain input data.

    Carries the offending row/line number when known (1-based, counting
    data rows after the header for CSV, physical lines for TSV).
    """

    def __init__(self, message, row=None):
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)
        self.row = row


class RuleError(FairminerError):
    """Invalid rule or rule set construction/evaluation."""


class OracleError(FairminerError):
    """Model oracle failure: bad model file, protocol violation, transport."""


class SamplingError(FairminerError):
    """Sample generation cannot proceed (e.g. no seed on the requested side)."""


class ScoringError(FairminerError):
    """Fairness score estimation aborted."""


class MitigationError(FairminerError):
    """Mitigation pipeline failure."""


class ConfigError(FairminerError):
    """Invalid audit configuration."""
