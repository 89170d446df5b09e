import os
import subprocess
import sys

import numpy as np
import pytest

from ipwmc import _kernels as K
from ipwmc import backend

LOOPS = {
    "bin_stats": K._bin_stats_loop,
    "binned_sums": K._binned_sums_loop,
    "left_riemann": K._left_riemann_loop,
    "trapezoid": K._trapezoid_loop,
    "ips_sweep": K._ips_sweep_loop,
}


def variants():
    out = [("python-loop", LOOPS)]
    if "numba" in K.IMPLEMENTATIONS:
        out.append(("numba", K.IMPLEMENTATIONS["numba"]))
    return out


def assert_same(a, b):
    if isinstance(a, tuple):
        for x, y in zip(a, b):
            assert_same(x, y)
    elif np.asarray(a).dtype.kind in "iu":
        np.testing.assert_array_equal(a, b)
    else:
        np.testing.assert_allclose(a, b, rtol=1e-12, atol=0)


def cases(seed):
    rng = np.random.default_rng(seed)
    edges = np.linspace(0.05, 0.95, 8)
    px = rng.uniform(0.05, 0.95, 300)
    px[:3] = [0.05, 0.95, edges[3]]
    idx = rng.integers(0, 7, 300)
    u = np.sort(np.concatenate(([0.0], rng.random(200), [1.0])))
    L = rng.uniform(0.0, 2.0, (120, 4)) + 1e-3
    counts = np.bincount(rng.integers(0, 4, 120), minlength=4).astype(float)
    psi = rng.uniform(0.5, 2.0, 4)
    return {
        "bin_stats": (px, edges),
        "binned_sums": (idx, rng.random(300), 7),
        "left_riemann": (u, u**2),
        "trapezoid": (u, np.sin(u)),
        "ips_sweep": (L, counts, psi),
    }


@pytest.mark.parametrize("label,impl", variants(), ids=[v[0] for v in variants()])
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_parity_with_numpy(label, impl, seed):
    for name, args in cases(seed).items():
        assert_same(impl[name](*args), K.IMPLEMENTATIONS["numpy"][name](*args))


def test_bin_stats_empty_bin_uses_midpoint():
    edges = np.array([0.0, 0.5, 1.0])
    for impl in [K.IMPLEMENTATIONS["numpy"]] + [v for _, v in variants()]:
        idx, counts, p_tilde = impl["bin_stats"](np.array([0.1, 0.2]), edges)
        assert counts.tolist() == [2, 0]
        assert p_tilde[1] == 0.75 and p_tilde[0] == pytest.approx(0.15)


def test_active_backend():
    assert K.BACKEND == backend()
    assert backend() in K.IMPLEMENTATIONS


def test_env_flag_selects_numpy():
    env = dict(os.environ, IPWMC_DISABLE_NUMBA="1")
    code = "import ipwmc, ipwmc._kernels as k; print(ipwmc.backend(), k.BACKEND)"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.split() == ["numpy", "numpy"]
