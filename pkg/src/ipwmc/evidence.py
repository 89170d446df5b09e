"""Monte Carlo estimators of ``psi = E_f[l(X)]``.

Importance sampling and its self-normalized, regression, difference and
adaptively normalized variants; Riemann and trapezoid sums over ordered
points; and the vertical-likelihood quadrature ``psi = int_0^1 Lambda(a) da``
on the deterministic nested-sampling grid ``a_i = exp(-i / K)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from . import _kernels
from .core import RandomStream
from .errors import DegenerateError, DomainError, InvalidSurvivalError

ArrayFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class IntegrandProblem:
    """Integrand ``l``, density ``f`` and proposal ``g`` on a domain.

    ``f`` may be unnormalized (``normalized=False``); the self-normalized
    estimators accept that, plain importance sampling does not. ``domain`` is
    ``(lo, hi)`` or ``None`` for an unbounded domain.
    """

    l: ArrayFn
    f: ArrayFn
    g_sample: Callable[[RandomStream, int], np.ndarray]
    g_density: ArrayFn
    domain: Optional[Tuple[float, float]] = (0.0, 1.0)
    normalized: bool = True
    truth: float = math.nan
    survival: Optional["SurvivalFunction"] = None
    name: str = ""


@dataclass(frozen=True)
class ISDraws:
    y: np.ndarray
    w: np.ndarray

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float)
        w = np.asarray(self.w, dtype=float)
        if y.shape != w.shape or y.ndim != 1:
            raise DomainError("points and weights must be 1-d arrays of equal length")
        if np.any(w < 0):
            raise DomainError("importance weights must be non-negative")
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "w", w)

    @property
    def n(self) -> int:
        return self.y.shape[0]


@dataclass(frozen=True)
class SurvivalFunction:
    """``Z(lam) = P(l(X) > lam)`` for ``X ~ f``; zero beyond ``lambda_max``."""

    z: ArrayFn
    lambda_max: float


def draw_is(prob: IntegrandProblem, n: int, stream: RandomStream) -> ISDraws:
    """Sample ``n`` points from the proposal and attach weights ``f / g``."""
    y = np.asarray(prob.g_sample(stream, n), dtype=float)
    return ISDraws(y=y, w=prob.f(y) / prob.g_density(y))


def _lvals(l_vals, n):
    l_vals = np.asarray(l_vals, dtype=float)
    if l_vals.shape != (n,):
        raise DomainError("l_vals must have one value per draw")
    return l_vals


def is_estimate(prob: IntegrandProblem, draws: ISDraws) -> float:
    """Plain importance sampling ``(1/n) sum l(y_i) w_i``."""
    if draws.n == 0:
        raise DegenerateError("importance sampling needs at least one draw")
    return float(np.mean(prob.l(draws.y) * draws.w))


def snis_estimate(draws: ISDraws, l_vals) -> float:
    """Self-normalized (ratio) estimator ``sum l w / sum w``."""
    l_vals = _lvals(l_vals, draws.n)
    wsum = float(np.sum(draws.w))
    if wsum <= 0.0:
        raise DegenerateError("all importance weights are zero")
    return float(np.sum(l_vals * draws.w)) / wsum


def regression_estimate(draws: ISDraws, l_vals) -> float:
    """Regression estimator using the weights as a control variate.

    Each draw gets ``V_i = W_i (1 + b (W_i - Wbar)) / n`` with
    ``b = (1 - Wbar) / mean((W - Wbar)^2)``; falls back to SNIS when the
    weights are constant.
    """
    l_vals = _lvals(l_vals, draws.n)
    n = draws.n
    if n < 2:
        raise DegenerateError("regression estimator needs at least two draws")
    w = draws.w
    wbar = float(np.mean(w))
    spread = float(np.mean((w - wbar) ** 2))
    if spread == 0.0:
        return snis_estimate(draws, l_vals)
    b = (1.0 - wbar) / spread
    v = w * (1.0 + b * (w - wbar)) / n
    return float(np.sum(v * l_vals))


def difference_estimate(draws: ISDraws, l_vals, gamma: float) -> float:
    """``mean(l w) + gamma (1 - mean(w))``."""
    l_vals = _lvals(l_vals, draws.n)
    if draws.n == 0:
        raise DegenerateError("difference estimator needs at least one draw")
    return float(np.mean(l_vals * draws.w)) + gamma * (1.0 - float(np.mean(draws.w)))


def optimal_gamma(draws: ISDraws, l_vals) -> float:
    """Plug-in variance-minimizing ``gamma = cov(l w, w) / var(w)``; 0 for constant weights."""
    l_vals = _lvals(l_vals, draws.n)
    c = np.cov(l_vals * draws.w, draws.w, ddof=1)
    return 0.0 if c[1, 1] == 0.0 else float(c[0, 1] / c[1, 1])


def an_is_estimate(draws: ISDraws, l_vals, lam: float) -> float:
    """Adaptively normalized IS ``sum l W / (lam n + (1 - lam) sum W)``.

    Here ``lam = 1`` is plain importance sampling and ``lam = 0`` is SNIS,
    the mirror image of the Trotter-Tukey convention in :mod:`ipwmc.ipw`.
    """
    l_vals = _lvals(l_vals, draws.n)
    num = float(np.sum(l_vals * draws.w))
    if lam == 1.0:
        return float(np.mean(l_vals * draws.w))
    wsum = float(np.sum(draws.w))
    denom = wsum if lam == 0.0 else lam * draws.n + (1.0 - lam) * wsum
    if denom == 0.0:
        raise DegenerateError(f"AN-IS denominator vanishes at lambda={lam}")
    return num / denom


# --- ordered-point quadrature ---------------------------------------------


def _ordered(points, domain, include_endpoints):
    if domain is None:
        raise DomainError("ordered-point quadrature needs a bounded domain")
    lo, hi = domain
    u = np.asarray(points, dtype=float).ravel()
    if np.any((u < lo) | (u > hi)):
        raise DomainError(f"points fall outside the domain [{lo}, {hi}]")
    if include_endpoints:
        u = np.concatenate(([lo], u, [hi]))
    u = np.sort(u)
    if u.size < 2 or u[0] == u[-1]:
        raise DegenerateError("need at least two distinct points")
    return u


def riemann_estimate(points, prob: IntegrandProblem, include_endpoints: bool = True) -> float:
    """Left Riemann sum ``sum_i (u_[i+1] - u_[i]) l(u_[i]) f(u_[i])`` over sorted points.

    The domain endpoints are added to the points so the first and last order
    statistics are ``a`` and ``b``; pass ``include_endpoints=False`` to use
    the points as given.
    """
    u = _ordered(points, prob.domain, include_endpoints)
    return _kernels.left_riemann(u, prob.l(u) * prob.f(u))


def trapezoid_estimate(points, prob: IntegrandProblem, include_endpoints: bool = True) -> float:
    """Trapezoid rule over sorted random points (weighted Monte Carlo)."""
    u = _ordered(points, prob.domain, include_endpoints)
    return _kernels.trapezoid(u, prob.l(u) * prob.f(u))


def riemann_snis_estimate(
    points, l: ArrayFn, f_tilde: ArrayFn, domain: Optional[Tuple[float, float]] = None
) -> float:
    """Ratio of Riemann sums for a density known up to a constant.

    Without ``domain`` the points are used as given; with it the endpoints are
    appended first.
    """
    if domain is None:
        u = np.sort(np.asarray(points, dtype=float).ravel())
        if u.size < 2 or u[0] == u[-1]:
            raise DegenerateError("need at least two distinct points")
    else:
        u = _ordered(points, domain, True)
    ft = f_tilde(u)
    denom = _kernels.left_riemann(u, ft)
    if denom <= 0.0:
        raise DegenerateError("Riemann sum of the density is not positive")
    return _kernels.left_riemann(u, l(u) * ft) / denom


# --- vertical likelihood ---------------------------------------------------

_BISECT_ITERS = 200
_BISECT_TOL = 1e-12


def check_survival(zfun: SurvivalFunction, grid: int = 257) -> None:
    """Raise :class:`InvalidSurvivalError` if ``Z`` increases on a probe grid."""
    lam = np.linspace(0.0, zfun.lambda_max, grid)
    z = np.asarray(zfun.z(lam), dtype=float)
    if np.any(np.diff(z) > 1e-12) or np.any(z > 1.0 + 1e-12) or np.any(z < -1e-12):
        raise InvalidSurvivalError("survival function must be non-increasing with values in [0, 1]")


def _lambda_inverse_many(zfun: SurvivalFunction, a: np.ndarray) -> np.ndarray:
    lo = np.zeros_like(a)
    hi = np.full_like(a, float(zfun.lambda_max))
    for _ in range(_BISECT_ITERS):
        if np.all(hi - lo <= _BISECT_TOL):
            break
        mid = 0.5 * (lo + hi)
        above = np.asarray(zfun.z(mid), dtype=float) > a
        lo = np.where(above, mid, lo)
        hi = np.where(above, hi, mid)
    return 0.5 * (lo + hi)


def lambda_inverse(zfun: SurvivalFunction, a: float, check: bool = True) -> float:
    """``Lambda(a) = sup{lam : Z(lam) > a}`` by bisection on ``[0, lambda_max]``."""
    if not 0.0 < a < 1.0:
        raise DomainError("a must lie strictly inside (0, 1)")
    if check:
        check_survival(zfun)
    return float(_lambda_inverse_many(zfun, np.array([float(a)]))[0])


def nested_grid(m: int, K: float) -> np.ndarray:
    """``a_0 = 1 > a_1 > ... > a_m`` with ``a_i = exp(-i / K)``."""
    if int(m) != m or m < 1:
        raise DomainError("m must be a positive integer")
    if not K > 0:
        raise DomainError("K must be positive")
    return np.exp(-np.arange(int(m) + 1) / K)


def nested_quadrature(zfun: SurvivalFunction, m: int, K: float) -> float:
    """``sum_{i=1}^m (a_{i-1} - a_i) Lambda(a_i)`` on the exponential grid."""
    a = nested_grid(m, K)
    check_survival(zfun)
    lam = _lambda_inverse_many(zfun, a[1:])
    return float(np.sum((a[:-1] - a[1:]) * lam))


# --- built-in problems -----------------------------------------------------


def _uniform_sampler(stream: RandomStream, n: int) -> np.ndarray:
    return stream.uniform01(n)


def _unit_density(x):
    return np.ones_like(np.asarray(x, dtype=float))


def _linear_density_sampler(stream: RandomStream, n: int) -> np.ndarray:
    # inverse CDF of f(x) = 1/2 + x on [0, 1]
    return -0.5 + np.sqrt(0.25 + 2.0 * stream.uniform01(n))


def _linear_uniform() -> IntegrandProblem:
    return IntegrandProblem(
        l=lambda x: np.asarray(x, dtype=float),
        f=_unit_density,
        g_sample=_uniform_sampler,
        g_density=_unit_density,
        truth=0.5,
        survival=SurvivalFunction(z=lambda lam: np.clip(1.0 - lam, 0.0, 1.0), lambda_max=1.0),
        name="linear-uniform",
    )


def _quadratic_uniform() -> IntegrandProblem:
    return IntegrandProblem(
        l=lambda x: np.asarray(x, dtype=float) ** 2,
        f=_unit_density,
        g_sample=_uniform_sampler,
        g_density=_unit_density,
        truth=1.0 / 3.0,
        survival=SurvivalFunction(
            z=lambda lam: np.clip(1.0 - np.sqrt(np.clip(lam, 0.0, None)), 0.0, 1.0), lambda_max=1.0
        ),
        name="quadratic-uniform",
    )


def _triangular_unnormalized() -> IntegrandProblem:
    # f_tilde(u) = u, i.e. f(u) = 2u up to a constant; E_f[u] = 2/3
    return IntegrandProblem(
        l=lambda x: np.asarray(x, dtype=float),
        f=lambda x: np.asarray(x, dtype=float),
        g_sample=_uniform_sampler,
        g_density=_unit_density,
        normalized=False,
        truth=2.0 / 3.0,
        survival=SurvivalFunction(z=lambda lam: np.clip(1.0 - lam**2, 0.0, 1.0), lambda_max=1.0),
        name="triangular-unnormalized",
    )


def _quadratic_linear_density() -> IntegrandProblem:
    # l(x) = x^2 under f(x) = 1/2 + x; sampled from f itself
    def z(lam):
        lam = np.clip(lam, 0.0, 1.0)
        s = np.sqrt(lam)
        return np.clip(1.0 - (0.5 * s + 0.5 * s * s), 0.0, 1.0)

    return IntegrandProblem(
        l=lambda x: np.asarray(x, dtype=float) ** 2,
        f=lambda x: 0.5 + np.asarray(x, dtype=float),
        g_sample=_linear_density_sampler,
        g_density=lambda x: 0.5 + np.asarray(x, dtype=float),
        truth=5.0 / 12.0,
        survival=SurvivalFunction(z=z, lambda_max=1.0),
        name="quadratic-linear-density",
    )


PROBLEMS = {
    "linear-uniform": _linear_uniform,
    "quadratic-uniform": _quadratic_uniform,
    "triangular-unnormalized": _triangular_unnormalized,
    "quadratic-linear-density": _quadratic_linear_density,
}


def get_problem(name: str) -> IntegrandProblem:
    try:
        return PROBLEMS[name]()
    except KeyError:
        raise DomainError(f"unknown problem {name!r}; choose from {sorted(PROBLEMS)}") from None
