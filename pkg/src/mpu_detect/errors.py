"""Exception taxonomy shared across the package.

The CLI maps these onto distinct exit codes (usage=1, config=2, data=3,
runtime=4); library callers can catch them individually.
"""


class MpuError(Exception):
    """Base class for all package errors."""


class UsageError(MpuError):
    """Bad command line invocation (unknown flags, missing arguments)."""


class ConfigError(MpuError, ValueError):
    """Invalid configuration value or schema violation."""


class DataError(MpuError, ValueError):
    """Unreadable, malformed, or empty input data."""


class BatchError(MpuError, ValueError):
    """A risk estimator received a batch it cannot evaluate."""
