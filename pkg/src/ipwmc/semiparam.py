"""Semiparametric maximum likelihood for several normalizing constants at once.

Draws ``x_i`` come from ``k`` samplers ``P_r(dx) = l_r(x) F(dx) / psi_r``
with ``n_r`` draws from sampler ``r``. The MLE solves the fixed point

    psi_s = sum_i l_s(x_i) / sum_r n_r l_r(x_i) / psi_r

which is iterative proportional scaling of the ``n x k`` array
``n_r l_r(x_i) F(x_i) / psi_r`` so that each row (draw) sums to 1 and each
column (sampler) sums to ``n_r``.
Only ratios of the ``psi_r`` are identified, so one sampler is pinned to 1.

Indices in this API are 0-based. The plain-text instance format uses 1-based
sampler labels and anchor, matching the usual notation.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np

from . import _kernels
from .core import RandomStream
from .errors import ConfigurationError, DomainError, SupportError


@dataclass(frozen=True)
class SemiparamData:
    """Design labels (0-based sampler of each draw) and ``L[i, r] = l_r(x_i)``."""

    labels: np.ndarray
    L: np.ndarray

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int64).ravel()
        L = np.ascontiguousarray(self.L, dtype=float)
        if L.ndim != 2 or L.shape[0] != labels.shape[0] or L.shape[0] == 0:
            raise DomainError("L must be an n x k matrix with one row per label")
        k = L.shape[1]
        if np.any((labels < 0) | (labels >= k)):
            raise DomainError("labels must lie in 0..k-1")
        if np.any(L < 0) or not np.all(np.isfinite(L)):
            raise DomainError("function values must be finite and non-negative")
        if np.any(np.bincount(labels, minlength=k) == 0):
            raise DomainError("every sampler needs at least one draw")
        empty = np.flatnonzero(~np.any(L > 0, axis=1))
        if empty.size:
            raise SupportError(f"row {int(empty[0])} has no positive function value")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "L", L)

    @property
    def n(self) -> int:
        return self.L.shape[0]

    @property
    def k(self) -> int:
        return self.L.shape[1]

    @property
    def counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.k)


@dataclass(frozen=True)
class MleSolution:
    psi_hat: np.ndarray
    f_masses: np.ndarray
    iterations: int
    residual: float
    converged: bool
    anchor: int
    residual_history: np.ndarray

    def ratio(self, r: int, s: int) -> float:
        return ratio_estimate(self, r, s)


def ips_solve(
    data: SemiparamData,
    anchor: int = 0,
    tol: float = 1e-13,
    max_iter: int = 100_000,
    init: Optional[np.ndarray] = None,
) -> MleSolution:
    """Iterate the fixed point until the max relative change drops below ``tol``.

    ``psi_hat[anchor]`` is rescaled to 1 after every sweep. Hitting
    ``max_iter`` is not an error: the solution comes back with
    ``converged=False`` and the last residual.
    """
    k = data.k
    if not 0 <= anchor < k:
        raise DomainError(f"anchor must lie in 0..{k - 1}")
    if not tol > 0:
        raise DomainError("tol must be positive")
    counts = data.counts.astype(float)
    psi = np.ones(k) if init is None else np.array(init, dtype=float)
    if psi.shape != (k,) or np.any(psi <= 0):
        raise DomainError("init must hold k positive values")
    psi = psi / psi[anchor]
    history = []
    residual = math.inf
    it = 0
    while it < max_iter:
        it += 1
        new, _ = _kernels.ips_sweep(data.L, counts, psi)
        new = new / new[anchor]
        residual = float(np.max(np.abs(new - psi) / psi))
        history.append(residual)
        psi = new
        if residual < tol:
            break
    _, denom = _kernels.ips_sweep(data.L, counts, psi)
    return MleSolution(
        psi_hat=psi,
        f_masses=1.0 / denom,
        iterations=it,
        residual=residual,
        converged=residual < tol,
        anchor=anchor,
        residual_history=np.asarray(history),
    )


def ratio_estimate(sol: MleSolution, r: int, s: int) -> float:
    """``psi_r / psi_s``; independent of the anchor."""
    if r == s:
        return 1.0
    return float(sol.psi_hat[r] / sol.psi_hat[s])


def scaled_table(data: SemiparamData, sol: MleSolution) -> np.ndarray:
    """The rescaled array ``n_r L[i, r] F(x_i) / psi_r``."""
    return data.counts[None, :] * data.L * sol.f_masses[:, None] / sol.psi_hat[None, :]


# --- plain-text instances --------------------------------------------------


def read_instance(path) -> tuple:
    """Read ``n k anchor`` then ``n`` rows ``label v_1 .. v_k`` (1-based label and anchor).

    Returns ``(data, anchor)`` with a 0-based anchor.
    """
    try:
        with open(path) as fh:
            rows = [ln.split() for ln in fh if ln.strip() and not ln.lstrip().startswith("#")]
    except OSError as exc:
        raise ConfigurationError(f"cannot read instance {os.fspath(path)!r}: {exc.strerror}") from exc
    if not rows or len(rows[0]) != 3:
        raise ConfigurationError("instance header must read 'n k anchor'")
    try:
        n, k, anchor = (int(v) for v in rows[0])
        body = np.array([[float(v) for v in row] for row in rows[1:]])
    except ValueError as exc:
        raise ConfigurationError(f"malformed instance file: {exc}") from exc
    if body.shape != (n, k + 1):
        raise ConfigurationError(f"expected {n} rows of {k + 1} values, got shape {body.shape}")
    labels = body[:, 0]
    if np.any(labels != np.round(labels)):
        raise ConfigurationError("labels must be integers")
    if not 1 <= anchor <= k:
        raise ConfigurationError(f"anchor must lie in 1..{k}")
    return SemiparamData(labels=labels.astype(np.int64) - 1, L=body[:, 1:]), anchor - 1


def write_instance(path, data: SemiparamData, anchor: int = 0) -> None:
    with open(path, "w") as fh:
        fh.write(f"{data.n} {data.k} {anchor + 1}\n")
        for lab, row in zip(data.labels, data.L):
            fh.write(" ".join([str(int(lab) + 1)] + [repr(float(v)) for v in row]) + "\n")


# --- built-in instances ----------------------------------------------------


def hand_instance() -> SemiparamData:
    """Six draws, two samplers, hand-picked values."""
    L = np.array(
        [
            [1.0, 0.5],
            [0.8, 0.9],
            [0.3, 1.2],
            [2.0, 0.4],
            [0.6, 0.6],
            [0.1, 1.5],
        ]
    )
    return SemiparamData(labels=np.array([0, 0, 0, 1, 1, 1]), L=L)


def symmetric_instance() -> SemiparamData:
    """Two samplers with identical functions and equal counts."""
    vals = np.array([0.2, 0.7, 1.3, 0.9, 0.4, 1.1, 0.5, 0.8])
    return SemiparamData(labels=np.repeat([0, 1], 4), L=np.column_stack([vals, vals]))


def gaussian_instance(
    scales=(0.5, 1.0, 2.0), per_sampler: int = 200, seed: int = 0
) -> SemiparamData:
    """Unnormalized Gaussians ``l_r(x) = exp(-x^2 / (2 s_r^2))`` sampled exactly.

    The true constants are ``s_r sqrt(2 pi)``, so ratios are ``s_r / s_t``.
    """
    stream = RandomStream(seed, 0)
    scales = np.asarray(scales, dtype=float)
    xs, labels = [], []
    for r, s in enumerate(scales):
        u1 = stream.uniform01(per_sampler)
        u2 = stream.uniform01(per_sampler)
        # Box-Muller keeps the sampler inside the three core primitives
        z = np.sqrt(-2.0 * np.log1p(-u1)) * np.cos(2.0 * math.pi * u2)
        xs.append(s * z)
        labels.append(np.full(per_sampler, r))
    x = np.concatenate(xs)
    L = np.exp(-(x[:, None] ** 2) / (2.0 * scales[None, :] ** 2))
    return SemiparamData(labels=np.concatenate(labels), L=L)


INSTANCES: Dict[str, callable] = {
    "hand-k2": hand_instance,
    "symmetric-k2": symmetric_instance,
    "gaussian-k3": gaussian_instance,
}


def get_instance(name: str) -> SemiparamData:
    try:
        return INSTANCES[name]()
    except KeyError:
        raise ConfigurationError(f"unknown instance {name!r}; choose from {sorted(INSTANCES)}") from None
