from __future__ import annotations


class EigenFactorsError(Exception):
    """Base class for every error raised by the package."""


class InvalidArgumentError(EigenFactorsError, ValueError):
    pass


class DomainError(EigenFactorsError, ValueError):
    pass


class DegeneratePlaneError(EigenFactorsError, ValueError):
    pass


class MetricUndefinedError(EigenFactorsError, ValueError):
    pass


class OptimizationFailedError(EigenFactorsError, RuntimeError):
    pass


class ConfigError(EigenFactorsError, ValueError):
    pass


class FormatError(EigenFactorsError, ValueError):
    pass


class StaleEstimateError(EigenFactorsError, RuntimeError):
    """A factor's plane was estimated for a different trajectory."""


class NotPositiveDefiniteError(EigenFactorsError, ArithmeticError):
    """A damped Hessian block could not be factorized."""
