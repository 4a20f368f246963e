"""Exception types raised across the package."""


class CVClusterError(Exception):
    """Base class for all package errors."""


class ParameterError(CVClusterError, ValueError):
    """A model or algorithm parameter is outside its admissible range."""


class FormatError(CVClusterError, ValueError):
    """Malformed input data (adjacency lists, spectra, fixtures)."""


class NumericDomainError(CVClusterError, ArithmeticError):
    """A matrix function was asked for outside its domain."""


class ContractViolation(CVClusterError, ValueError):
    """An input failed a structural check (symplecticity, unitarity, shape)."""


class NonFiniteFitnessError(CVClusterError, FloatingPointError):
    """The objective handed to the evolution strategy returned nan/inf."""


class ConfigError(CVClusterError, ValueError):
    """An experiment or routing configuration is inconsistent."""
