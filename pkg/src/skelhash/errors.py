"""Exception types shared across the package.

The CLI maps these onto exit codes: configuration/usage problems exit 1,
data problems exit 2, numeric failures exit 3.
"""


class SkelHashError(Exception):
    """Base class for all package errors."""


class ConfigError(SkelHashError):
    """Invalid configuration, hyperparameter, or incompatible shapes."""


class CompatibilityError(ConfigError):
    """Model and input do not fit together (dimension/version mismatch)."""


class DataError(SkelHashError):
    """Dataset-level problem: empty dataset, missing labels, bad payload."""


class ParseError(DataError):
    """Malformed sequence file; the message names file and line number."""


class NumericError(SkelHashError):
    """A solver produced non-finite values or hit a singular system."""
