"""Exception types raised by the estimators and the harness."""


class IpwmcError(Exception):
    """Base class for all package errors."""


class DomainError(IpwmcError, ValueError):
    """An argument lies outside its mathematical domain."""


class DivisionHazardError(IpwmcError, ZeroDivisionError):
    """A responding unit carries zero inclusion probability."""


class EmptySampleError(IpwmcError, ValueError):
    """No responding units, so a self-normalized denominator is zero."""


class DegenerateError(IpwmcError, ValueError):
    """A denominator, weight set, or grid collapsed to zero."""


class ConfigurationError(IpwmcError, ValueError):
    """A required input or sub-configuration is missing or inconsistent."""


class InvalidSurvivalError(IpwmcError, ValueError):
    """A survival function was found to increase somewhere."""


class SupportError(IpwmcError, ValueError):
    """A point has no positive function value under any sampler."""
