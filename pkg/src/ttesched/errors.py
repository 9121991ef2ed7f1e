"""Exception types shared across the package."""


class TtError(Exception):
    """Base class for all package errors."""


class ConfigError(TtError):
    """Invalid configuration or malformed input (CLI exit code 2)."""


class ConflictError(TtError):
    """An occupancy operation would double-book a transmission slot."""


class UnknownFlowError(TtError):
    """A flow id was referenced that is not currently admitted."""


class LimitError(TtError):
    """An instance exceeds the exact oracle's size limits."""
