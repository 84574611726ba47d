"""Exception types shared across the package."""


class NcsaeError(Exception):
    """Base class for errors raised by this package."""


class DataFormatError(NcsaeError):
    """A data or model file could not be parsed (bad magic, truncation, corruption)."""


class ConfigError(NcsaeError):
    """A run configuration is invalid or references missing files."""


class TrainingDivergedError(NcsaeError):
    """Training produced a non-finite or runaway loss and was aborted."""
