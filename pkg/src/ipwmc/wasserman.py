"""The Robins-Ritov-Wasserman missing-data model and its estimators.

A population holds ``B`` success probabilities ``theta_b`` and known response
probabilities ``p_b`` bounded in ``[delta, 1 - delta]``. Each of ``n`` draws
picks a label uniformly, responds with probability ``p_label``, and, if it
responds, reports a Bernoulli(``theta_label``) outcome. The target is the
unweighted mean ``psi`` of ``theta``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import _kernels
from .core import RandomStream
from .errors import DomainError, EmptySampleError
from .ipw import WeightedSample


@dataclass(frozen=True)
class WassermanConfig:
    B: int = 1000
    n: int = 100
    delta: float = 0.01
    theta_lo: float = 0.6
    theta_hi: float = 0.9
    alpha_f: float = 1.0
    k_bins: int = 5

    def __post_init__(self):
        if int(self.B) != self.B or self.B < 1:
            raise DomainError(f"B must be a positive integer, got {self.B!r}")
        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f"n must be a positive integer, got {self.n!r}")
        if not 0.0 < self.delta < 0.5:
            raise DomainError(f"delta must lie in (0, 0.5), got {self.delta!r}")
        if not 0.0 <= self.theta_lo <= self.theta_hi <= 1.0:
            raise DomainError("need 0 <= theta_lo <= theta_hi <= 1")
        if not self.alpha_f > 0:
            raise DomainError("alpha_f must be positive")
        if int(self.k_bins) != self.k_bins or self.k_bins < 2:
            raise DomainError("k_bins must be an integer >= 2")


@dataclass(frozen=True)
class Population:
    theta: np.ndarray
    p: np.ndarray

    @property
    def B(self) -> int:
        return self.theta.shape[0]

    @property
    def psi(self) -> float:
        """Mean of ``theta``, recomputed on every access."""
        return float(np.mean(self.theta))


@dataclass(frozen=True)
class Draws:
    """``x`` holds labels in 1..B; ``r`` and ``y`` are 0/1 with ``r == 0 => y == 0``."""

    x: np.ndarray
    r: np.ndarray
    y: np.ndarray

    @property
    def n(self) -> int:
        return self.x.shape[0]

    def p_of(self, pop: Population) -> np.ndarray:
        """Response probability attached to each draw."""
        return pop.p[self.x - 1]


@dataclass(frozen=True)
class BinPartition:
    k: int
    edges: np.ndarray
    counts: np.ndarray
    p_tilde: np.ndarray
    index: np.ndarray  # bin of each draw, 0-based


class DeltaMoments(NamedTuple):
    e_bayes: float
    v_bayes: float
    v_ht: float


class HarmelingEstimates(NamedTuple):
    mle: float
    bayes: float


def generate_population(cfg: WassermanConfig, stream: RandomStream) -> Population:
    """Draw ``theta ~ U(theta_lo, theta_hi)`` then ``p ~ U(delta, 1 - delta)``, iid over B."""
    theta = stream.uniform(cfg.theta_lo, cfg.theta_hi, cfg.B)
    p = stream.uniform(cfg.delta, 1.0 - cfg.delta, cfg.B)
    return Population(theta=theta, p=p)


def simulate_draws(pop: Population, n: int, stream: RandomStream) -> Draws:
    """Simulate ``n`` iid triples from the hierarchical model.

    Exactly ``3 n`` uniforms are consumed whatever the response pattern, so a
    stream replays identically.
    """
    x = stream.discrete_uniform(pop.B, n)
    r = stream.bernoulli(pop.p[x - 1], n)
    u = stream.uniform01(n)
    y = ((u < pop.theta[x - 1]) & (r == 1)).astype(np.int8)
    return Draws(x=x, r=r, y=y)


def to_weighted_sample(draws: Draws, pop: Population) -> WeightedSample:
    return WeightedSample(y=draws.y, p=draws.p_of(pop), r=draws.r)


def ht_wasserman(draws: Draws, pop: Population) -> float:
    """``(1/n) sum R_i Y_i / p_{X_i}``."""
    ry = draws.r * draws.y
    return float(np.sum(ry / draws.p_of(pop)) / draws.n)


def hajek_wasserman(draws: Draws, pop: Population) -> float:
    px = draws.p_of(pop)
    denom = float(np.sum(draws.r / px))
    if denom == 0.0:
        raise EmptySampleError("no responses in the draws")
    return float(np.sum(draws.r * draws.y / px)) / denom


def bayes_li(draws: Draws, alpha_f: float = 1.0) -> float:
    """Posterior mean of ``psi`` under the exchangeable Beta hierarchy.

    ``(sum R Y + alpha_f) / (sum R + 2 alpha_f)``; only the prior shape on
    ``psi`` enters the closed form.
    """
    if not alpha_f > 0:
        raise DomainError("alpha_f must be positive")
    return (float(np.sum(draws.r * draws.y)) + alpha_f) / (float(np.sum(draws.r)) + 2.0 * alpha_f)


def bin_edges(k: int, delta: float) -> np.ndarray:
    """``k + 1`` equally spaced edges from ``delta`` to ``1 - delta``."""
    edges = delta + (1.0 - 2.0 * delta) * np.arange(k + 1) / k
    edges[0] = delta
    edges[-1] = 1.0 - delta
    return edges


def bin_partition(draws: Draws, pop: Population, k: int, delta: float) -> BinPartition:
    """Group the draws' response probabilities into ``k`` equal-width bins.

    Bins are half-open ``[e_j, e_{j+1})`` except the last, which also takes
    ``1 - delta``. Empty bins get the midpoint as their smoothed probability.
    """
    if int(k) != k or k < 2:
        raise DomainError("k must be an integer >= 2")
    edges = bin_edges(int(k), delta)
    idx, counts, p_tilde = _kernels.bin_stats(np.ascontiguousarray(draws.p_of(pop), dtype=float), edges)
    return BinPartition(k=int(k), edges=edges, counts=counts, p_tilde=p_tilde, index=idx)


def _binned_response_sums(draws: Draws, part: BinPartition):
    ry = np.ascontiguousarray(draws.r * draws.y, dtype=float)
    r = np.ascontiguousarray(draws.r, dtype=float)
    return (
        _kernels.binned_sums(part.index, ry, part.k),
        _kernels.binned_sums(part.index, r, part.k),
    )


def bs_ht(draws: Draws, part: BinPartition) -> float:
    """Binned-smoothed Horvitz-Thompson: ``(1/n) sum_j (sum_{i in j} R Y) / p_tilde_j``."""
    ry_sums, _ = _binned_response_sums(draws, part)
    return float(np.sum(ry_sums / part.p_tilde)) / draws.n


def bs_hajek(draws: Draws, part: BinPartition) -> float:
    """Binned-smoothed Hajek: binned ``R Y`` over binned ``R``, both weighted by ``1 / p_tilde``."""
    ry_sums, r_sums = _binned_response_sums(draws, part)
    denom = float(np.sum(r_sums / part.p_tilde))
    if denom == 0.0:
        raise EmptySampleError("no responses in the draws")
    return float(np.sum(ry_sums / part.p_tilde)) / denom


def delta_moments(
    pop: Population, n: int, alpha_f: float = 1.0, covariance: str = "corrected"
) -> DeltaMoments:
    """Delta-method mean and variance of :func:`bayes_li`, plus the exact HT variance.

    The ratio is ``X / Y`` with ``X = sum R Y + alpha_f`` and
    ``Y = sum R + 2 alpha_f``. Moments of the sums:

    * ``E X = n psi pbar + alpha_f``, ``E Y = n pbar + 2 alpha_f``
    * ``V X = n (tp - tp^2)`` with ``tp = mean(theta * p)``
    * ``V Y = n (pbar - pbar^2)``
    * ``Cov(X, Y) = n psi pbar (1 - pbar)``

    ``covariance="printed"`` swaps in ``psi n pbar (1 - n pbar)`` instead; that
    form grows like ``n^2`` and is kept only so the two can be compared.
    """
    psi = pop.psi
    pbar = float(np.mean(pop.p))
    tp = float(np.mean(pop.theta * pop.p))
    mx = n * psi * pbar + alpha_f
    my = n * pbar + 2.0 * alpha_f
    vx = n * (tp - tp * tp)
    vy = n * (pbar - pbar * pbar)
    if covariance == "corrected":
        cxy = n * psi * pbar * (1.0 - pbar)
    elif covariance == "printed":
        cxy = psi * n * pbar * (1.0 - n * pbar)
    else:
        raise DomainError(f"unknown covariance form {covariance!r}")
    ratio = mx / my
    v_bayes = ratio**2 * (vx / mx**2 + vy / my**2 - 2.0 * cxy / (mx * my))
    v_ht = (float(np.mean(pop.theta / pop.p)) - psi**2) / n
    return DeltaMoments(e_bayes=ratio, v_bayes=v_bayes, v_ht=v_ht)


def harmeling_estimates(y, r, sigma: float) -> HarmelingEstimates:
    """MLE and posterior mean of ``psi`` in the normal-outcome variant.

    ``mle = sum(r y) / sum(r)`` and ``bayes = sum(r y) / (2 / sigma + sum(r))``.
    Raises :class:`EmptySampleError` when nobody responded; use
    :func:`harmeling_bayes` for the posterior mean alone.
    """
    y = np.asarray(y, dtype=float)
    r = np.asarray(r, dtype=float)
    nr = float(np.sum(r))
    if nr == 0.0:
        raise EmptySampleError("MLE undefined without responses")
    return HarmelingEstimates(mle=float(np.sum(r * y)) / nr, bayes=harmeling_bayes(y, r, sigma))


def harmeling_bayes(y, r, sigma: float) -> float:
    if not sigma > 0:
        raise DomainError("sigma must be positive")
    y = np.asarray(y, dtype=float)
    r = np.asarray(r, dtype=float)
    return float(np.sum(r * y)) / (2.0 / sigma + float(np.sum(r)))


def hoeffding_tail_bound(n: int, delta: float, psi: float, eps: float) -> float:
    """``exp(-2 n delta^2 (psi + eps)^2)``, the claimed upper-tail bound for the Bayes estimator."""
    if not eps > 0:
        raise DomainError("eps must be positive")
    return math.exp(-2.0 * n * delta**2 * (psi + eps) ** 2)
