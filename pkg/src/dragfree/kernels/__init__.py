"""Hot per-frequency kernels with selectable backend.

The numba backend is used by default when numba imports cleanly; setting the
environment variable ``DRAGFREE_NUMBA=0`` before import forces the pure-numpy
fallback. ``benchmarks/bench_kernels.py`` compares the two.
"""

from __future__ import annotations

import importlib
import os

from ._common import SINGULAR_RTOL, SOURCE_ORDER

ENV_FLAG = "DRAGFREE_NUMBA"


def get_backend(name: str):
    """Import a kernel backend by name ("numpy" or "numba")."""
    if name not in ("numpy", "numba"):
        raise ValueError(f"unknown kernel backend {name!r}")
    return importlib.import_module(f".{'_numba_impl' if name == 'numba' else '_numpy_impl'}",
                                   __package__)


def _select():
    if os.environ.get(ENV_FLAG, "1") == "0":
        return get_backend("numpy")
    try:
        return get_backend("numba")
    except ImportError:
        return get_backend("numpy")


_impl = _select()

BACKEND = _impl.BACKEND
coth_stable = _impl.coth_stable
effective_energy_grid = _impl.effective_energy_grid
columns_high_gain = _impl.columns_high_gain
columns_finite_gain = _impl.columns_finite_gain


def backend_name() -> str:
    """Name of the kernel backend selected at import time."""
    return BACKEND


__all__ = [
    "ENV_FLAG",
    "SINGULAR_RTOL",
    "SOURCE_ORDER",
    "backend_name",
    "columns_finite_gain",
    "columns_high_gain",
    "coth_stable",
    "effective_energy_grid",
    "get_backend",
]
