"""Backend selection for the compiled kernels.

Set ``IPWMC_DISABLE_NUMBA=1`` to force the pure-numpy path. The numba path is
also skipped silently when numba cannot be imported.
"""

import os

_FALSY = {"", "0", "false", "no", "off"}

DISABLE_NUMBA = os.environ.get("IPWMC_DISABLE_NUMBA", "0").strip().lower() not in _FALSY

try:
    import numba
except ImportError:  # pragma: no cover - exercised only without numba installed
    numba = None

HAVE_NUMBA = numba is not None

# fastmath stays off: the identity tests compare backends at 1e-12.
NJIT_OPTS = dict(cache=True, nogil=True, fastmath=False, error_model="numpy")


def njit(func):
    """Compile ``func`` with numba, or return None when numba is unavailable."""
    if numba is None:
        return None
    return numba.njit(**NJIT_OPTS)(func)


def backend() -> str:
    """Name of the backend the public kernels dispatch to."""
    return "numba" if HAVE_NUMBA and not DISABLE_NUMBA else "numpy"
