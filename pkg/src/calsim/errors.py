"""Exception types shared across the package."""


class CalsimError(Exception):
    """Base class for all package errors."""


class DomainError(CalsimError, ValueError):
    """An argument fell outside the mathematical domain of an operation."""


class ConfigError(CalsimError, ValueError):
    """A configuration value or file is invalid."""


class AccountingError(CalsimError):
    """Wall-clock bookkeeping of a trace does not add up."""


class ComparisonError(CalsimError):
    """Results evaluated at different parameters were compared."""
