"""Inverse-probability-weight estimators and Monte Carlo evidence estimation."""

from ._accel import backend
from .core import RandomStream, SummaryAccumulator
from .errors import (
    ConfigurationError,
    DegenerateError,
    DivisionHazardError,
    DomainError,
    EmptySampleError,
    InvalidSurvivalError,
    IpwmcError,
    SupportError,
)
from .ipw import (
    IpwDiagnostics,
    WeightedSample,
    adaptive_normalization,
    hajek,
    hajek_ratio_total,
    horvitz_thompson,
    trotter_tukey,
)

__version__ = "0.1.0"
