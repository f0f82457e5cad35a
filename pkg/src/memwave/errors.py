"""Shared exception types."""


class ConfigError(ValueError):
    """Invalid parameter or configuration value."""


class DomainError(ValueError):
    """Argument outside the mathematical domain of an operation."""


class UnsupportedError(ValueError):
    """Operation not defined for this input (by design, not by accident)."""


class InsufficientDataError(ValueError):
    """Not enough samples to carry out a numeric procedure."""
