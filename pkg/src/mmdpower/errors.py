"""Exception types shared across the package.

The CLI maps these onto exit codes: usage errors -> 1, data errors -> 2,
numerical failures -> 3.
"""


class MMDPowerError(Exception):
    """Base class for errors raised by this package."""


class DimensionError(MMDPowerError, ValueError):
    """Shape or sample-size preconditions violated."""


class DataFormatError(MMDPowerError, ValueError):
    """Malformed dataset file (bad magic, truncated payload, ragged CSV...)."""


class NumericalError(MMDPowerError, ValueError):
    """A computation cannot proceed (e.g. variance requested with m < 4)."""
