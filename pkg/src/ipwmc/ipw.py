"""Inverse-probability-weight estimators for survey samples.

All estimators take a :class:`WeightedSample` and return an
:class:`IpwDiagnostics` carrying the weighted total ``s_hat``, the estimated
size ``n_hat``, the denominator mix ``lam`` that was used, and the estimate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import (
    ConfigurationError,
    DegenerateError,
    DivisionHazardError,
    DomainError,
    EmptySampleError,
)


@dataclass(frozen=True)
class WeightedSample:
    """Outcomes ``y`` with response probabilities ``p`` and indicators ``r``.

    ``r`` defaults to all ones (fully observed). ``a`` holds optional positive
    auxiliaries with a known total, used by :func:`hajek_ratio_total`.
    A unit may carry ``p == 0`` only if it did not respond; the estimators
    raise :class:`DivisionHazardError` otherwise.
    """

    y: np.ndarray
    p: np.ndarray
    r: Optional[np.ndarray] = None
    a: Optional[np.ndarray] = None

    def __post_init__(self):
        y = np.atleast_1d(np.asarray(self.y, dtype=float))
        p = np.atleast_1d(np.asarray(self.p, dtype=float))
        n = y.shape[0]
        if y.ndim != 1 or n < 1:
            raise DomainError("y must be a non-empty 1-d sequence")
        r = np.ones(n, dtype=np.int8) if self.r is None else np.atleast_1d(np.asarray(self.r))
        if p.shape != (n,) or r.shape != (n,):
            raise DomainError("y, p and r must share one length")
        if not np.all((p >= 0.0) & (p <= 1.0)):
            raise DomainError("probabilities must lie in [0, 1]")
        if not np.all((r == 0) | (r == 1)):
            raise DomainError("response indicators must be 0 or 1")
        r = r.astype(np.int8)
        a = self.a
        if a is not None:
            a = np.atleast_1d(np.asarray(a, dtype=float))
            if a.shape != (n,):
                raise DomainError("auxiliaries must match the sample length")
            if not np.all(a > 0):
                raise DomainError("auxiliaries must be strictly positive")
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "a", a)

    @property
    def n(self) -> int:
        return self.y.shape[0]

    def inverse_weights(self) -> np.ndarray:
        """``r_k / p_k`` with non-responders mapped to zero."""
        hazard = (self.r == 1) & (self.p == 0.0)
        if np.any(hazard):
            k = int(np.flatnonzero(hazard)[0])
            raise DivisionHazardError(f"unit {k} responded with zero inclusion probability")
        out = np.zeros(self.n)
        resp = self.r == 1
        out[resp] = 1.0 / self.p[resp]
        return out


@dataclass(frozen=True)
class IpwDiagnostics:
    s_hat: float
    n_hat: float
    lam: float
    estimate: float


def _totals(s: WeightedSample):
    w = s.inverse_weights()
    return float(np.sum(w * s.y)), float(np.sum(w)), w


def horvitz_thompson(s: WeightedSample, total: bool = False) -> IpwDiagnostics:
    """Horvitz-Thompson estimator ``S_hat / n``.

    With ``total=True`` the population-total form ``S_hat`` is returned as the
    estimate instead of the mean.
    """
    s_hat, n_hat, _ = _totals(s)
    est = s_hat if total else s_hat / s.n
    return IpwDiagnostics(s_hat, n_hat, 0.0, est)


def hajek(s: WeightedSample) -> IpwDiagnostics:
    """Hajek (self-normalized) estimator ``S_hat / n_hat``."""
    s_hat, n_hat, _ = _totals(s)
    if n_hat == 0.0:
        raise EmptySampleError("Hajek estimator needs at least one responding unit")
    return IpwDiagnostics(s_hat, n_hat, 1.0, s_hat / n_hat)


def trotter_tukey(s: WeightedSample, lam: float) -> IpwDiagnostics:
    """Trotter-Tukey mix ``S_hat / ((1 - lam) n + lam n_hat)``.

    ``lam = 0`` is Horvitz-Thompson and ``lam = 1`` is Hajek; both endpoints
    are routed through the exact denominators so the identities hold to the
    last bit.
    """
    s_hat, n_hat, _ = _totals(s)
    if lam == 0.0:
        denom = float(s.n)
    elif lam == 1.0:
        denom = n_hat
    else:
        denom = (1.0 - lam) * s.n + lam * n_hat
    if denom == 0.0:
        raise DegenerateError(f"Trotter-Tukey denominator vanishes at lambda={lam}")
    return IpwDiagnostics(s_hat, n_hat, float(lam), s_hat / denom)


def adaptive_normalization(s: WeightedSample) -> IpwDiagnostics:
    """Adaptive normalization via its difference-estimator form.

    The control-variate coefficient is the plug-in ratio
    ``cov(r y / p, r / p) / var(r / p)`` (``n - 1`` divisors), and the estimate
    is ``psi_HT + gamma * (1 - n_hat / n)``. The ``lam`` recorded in the
    diagnostics is the Trotter-Tukey mix that reproduces this estimate; it is
    NaN when that mix is not identifiable (``n_hat == n`` or a zero estimate).

    Constant weights make the coefficient 0/0; the Hajek estimate is returned.
    """
    s_hat, n_hat, w = _totals(s)
    n = s.n
    if n < 2 or np.var(w) == 0.0:
        return hajek(s)
    wy = w * s.y
    cov = np.cov(wy, w, ddof=1)
    if cov[1, 1] == 0.0:
        return hajek(s)
    gamma = cov[0, 1] / cov[1, 1]
    est = s_hat / n + gamma * (1.0 - n_hat / n)
    if n_hat == n or est == 0.0:
        lam = math.nan
    else:
        lam = (s_hat / est - n) / (n_hat - n)
    return IpwDiagnostics(s_hat, n_hat, float(lam), float(est))


def hajek_ratio_total(s: WeightedSample) -> float:
    """Hajek's auxiliary ratio estimator of a population total.

    ``(sum_k a_k) * sum(r y / p) / sum(r a / p)``, where the first sum runs over
    every unit (the known auxiliary total) and the ratio over responders.
    """
    if s.a is None:
        raise ConfigurationError("hajek_ratio_total needs auxiliary values a")
    w = s.inverse_weights()
    denom = float(np.sum(w * s.a))
    if denom <= 0.0:
        raise EmptySampleError("no responding unit carries auxiliary weight")
    return float(np.sum(s.a)) * float(np.sum(w * s.y)) / denom
