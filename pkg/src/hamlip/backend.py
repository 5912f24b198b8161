"""Kernel backend selection.

Hot numeric kernels (shortest paths, all-pairs relaxation) exist twice:
a numba @njit implementation and a pure-numpy fallback.  The active
backend is chosen by, in order of precedence:

  1. an explicit ``set_backend("numba" | "numpy")`` call,
  2. the ``HAMLIP_BACKEND`` environment variable,
  3. "numba" when importable, else "numpy".

``benchmarks/bench_backends.py`` compares the two on identical graphs.
"""

from __future__ import annotations

import os
import warnings

_VALID = ("numba", "numpy")
_forced: str | None = None


def _env_choice() -> str | None:
    raw = os.environ.get("HAMLIP_BACKEND")
    if raw is None:
        return None
    name = raw.strip().lower()
    if name not in _VALID:
        raise ValueError(f"HAMLIP_BACKEND must be one of {_VALID}, got {raw!r}")
    return name


def _numba_available() -> bool:
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


def active_backend() -> str:
    if _forced is not None:
        return _forced
    env = _env_choice()
    if env is not None:
        if env == "numba" and not _numba_available():
            warnings.warn("HAMLIP_BACKEND=numba but numba is not importable; using numpy")
            return "numpy"
        return env
    return "numba" if _numba_available() else "numpy"


def set_backend(name: str | None) -> None:
    """Force a backend (None restores env/default resolution)."""
    global _forced
    if name is not None and name not in _VALID:
        raise ValueError(f"backend must be one of {_VALID}, got {name!r}")
    _forced = name


def kernels():
    """Return the kernel module for the active backend."""
    if active_backend() == "numba":
        from . import _kernels_numba

        return _kernels_numba
    from . import _kernels_numpy

    return _kernels_numpy


def set_num_threads(n: int) -> None:
    """Cap worker threads used by the numba backend (numpy backend is serial)."""
    if n < 1:
        raise ValueError("thread count must be >= 1")
    if _numba_available():
        import numba

        numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))
