"""Exception hierarchy shared across the package."""


class LiquidChainError(Exception):
    """Base class for all package errors."""


class ConfigurationError(LiquidChainError, ValueError):
    """Invalid parameters or configuration file contents."""


class DomainError(LiquidChainError, ValueError):
    """An input lies outside the domain of an operation."""


class NumericError(LiquidChainError, ArithmeticError):
    """A computation produced non-finite values."""


class TrainingError(NumericError):
    """Model training diverged."""


class SchemaError(LiquidChainError, KeyError):
    """A result file or record is missing required series."""


class DegenerateInputError(DomainError):
    """Statistic undefined for the given input (e.g. all values identical)."""


class TuningError(LiquidChainError, RuntimeError):
    """Every tuning trial failed."""
