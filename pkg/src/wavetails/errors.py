"""Shared exception types.

The CLI maps these onto exit codes: ConfigError -> 1, condition/acceptance
failures -> 2, NumericalError -> 3.
"""


class WavetailsError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(WavetailsError):
    """Malformed configuration or invalid user input."""


class NumericalError(WavetailsError):
    """A numerical procedure failed (divergence, overflow, conditioning)."""
