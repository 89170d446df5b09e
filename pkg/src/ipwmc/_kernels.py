"""Inner loops shared by the estimators.

Every kernel exists twice: a vectorized numpy version and an explicit loop
compiled with numba. The public names at the bottom of the module dispatch to
one of them according to :func:`ipwmc._accel.backend`; both sets stay
reachable through :data:`IMPLEMENTATIONS` so tests and benchmarks can compare
them directly.
"""

import numpy as np

from ._accel import backend, njit


# --- bin assignment -------------------------------------------------------


def _bin_stats_numpy(px, edges):
    k = edges.shape[0] - 1
    idx = np.searchsorted(edges, px, side="right") - 1
    np.clip(idx, 0, k - 1, out=idx)
    counts = np.bincount(idx, minlength=k)
    sums = np.bincount(idx, weights=px, minlength=k)
    mids = 0.5 * (edges[:-1] + edges[1:])
    p_tilde = np.where(counts > 0, sums / np.maximum(counts, 1), mids)
    return idx.astype(np.int64), counts.astype(np.int64), p_tilde


def _bin_stats_loop(px, edges):
    k = edges.shape[0] - 1
    n = px.shape[0]
    idx = np.empty(n, dtype=np.int64)
    counts = np.zeros(k, dtype=np.int64)
    sums = np.zeros(k)
    for i in range(n):
        x = px[i]
        # rightmost edge e_j with e_j <= x, clipped into 0..k-1
        lo = 0
        hi = k + 1
        while lo < hi:
            mid = (lo + hi) // 2
            if edges[mid] <= x:
                lo = mid + 1
            else:
                hi = mid
        j = lo - 1
        if j < 0:
            j = 0
        elif j > k - 1:
            j = k - 1
        idx[i] = j
        counts[j] += 1
        sums[j] += x
    p_tilde = np.empty(k)
    for j in range(k):
        if counts[j] > 0:
            p_tilde[j] = sums[j] / counts[j]
        else:
            p_tilde[j] = 0.5 * (edges[j] + edges[j + 1])
    return idx, counts, p_tilde


def _binned_sums_numpy(idx, values, k):
    return np.bincount(idx, weights=values, minlength=k)


def _binned_sums_loop(idx, values, k):
    out = np.zeros(k)
    for i in range(idx.shape[0]):
        out[idx[i]] += values[i]
    return out


# --- ordered-point quadrature ---------------------------------------------


def _left_riemann_numpy(u, h):
    return float(np.sum(np.diff(u) * h[:-1]))


def _left_riemann_loop(u, h):
    total = 0.0
    for i in range(u.shape[0] - 1):
        total += (u[i + 1] - u[i]) * h[i]
    return total


def _trapezoid_numpy(u, h):
    return float(np.sum(np.diff(u) * 0.5 * (h[:-1] + h[1:])))


def _trapezoid_loop(u, h):
    total = 0.0
    for i in range(u.shape[0] - 1):
        total += (u[i + 1] - u[i]) * 0.5 * (h[i] + h[i + 1])
    return total


# --- semiparametric fixed point -------------------------------------------


def _ips_sweep_numpy(L, counts, psi):
    denom = L @ (counts / psi)
    new_psi = (L / denom[:, None]).sum(axis=0)
    return new_psi, denom


def _ips_sweep_loop(L, counts, psi):
    n, k = L.shape
    scale = np.empty(k)
    for r in range(k):
        scale[r] = counts[r] / psi[r]
    denom = np.zeros(n)
    new_psi = np.zeros(k)
    for i in range(n):
        d = 0.0
        for r in range(k):
            d += L[i, r] * scale[r]
        denom[i] = d
    for i in range(n):
        inv = 1.0 / denom[i]
        for r in range(k):
            new_psi[r] += L[i, r] * inv
    return new_psi, denom


IMPLEMENTATIONS = {
    "numpy": {
        "bin_stats": _bin_stats_numpy,
        "binned_sums": _binned_sums_numpy,
        "left_riemann": _left_riemann_numpy,
        "trapezoid": _trapezoid_numpy,
        "ips_sweep": _ips_sweep_numpy,
    },
}

_compiled = {
    "bin_stats": njit(_bin_stats_loop),
    "binned_sums": njit(_binned_sums_loop),
    "left_riemann": njit(_left_riemann_loop),
    "trapezoid": njit(_trapezoid_loop),
    "ips_sweep": njit(_ips_sweep_loop),
}
if all(fn is not None for fn in _compiled.values()):
    IMPLEMENTATIONS["numba"] = _compiled

BACKEND = backend()
_active = IMPLEMENTATIONS[BACKEND]

bin_stats = _active["bin_stats"]
binned_sums = _active["binned_sums"]
left_riemann = _active["left_riemann"]
trapezoid = _active["trapezoid"]
ips_sweep = _active["ips_sweep"]
