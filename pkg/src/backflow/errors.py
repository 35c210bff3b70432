"""Exception taxonomy shared across the toolkit.

The command line driver maps these onto exit codes: ConfigError,
DomainError and ResourceError are configuration problems (exit 2),
NumericalError and ShapeError are runtime failures (exit 3), and
SchemaError joins plain I/O failures (exit 4).
"""

__all__ = [
    "BackflowError",
    "ConfigError",
    "DomainError",
    "ResourceError",
    "NumericalError",
    "ShapeError",
    "SchemaError",
]


class BackflowError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(BackflowError):
    """Invalid or inconsistent run configuration."""


class DomainError(BackflowError):
    """Input outside the mathematical domain of an operation."""


class ResourceError(BackflowError):
    """Requested computation exceeds the configured resource budget."""


class NumericalError(BackflowError):
    """Numerical failure during integration, propagation or root finding."""


class ShapeError(BackflowError):
    """Mismatched grids or array shapes between series."""


class SchemaError(BackflowError):
    """Malformed CSV input: header, column or value violations."""
