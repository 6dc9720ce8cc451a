"""Backend selection for the hot kernels.

Every kernel in the package ships twice: a loop-style version compiled with
``numba.njit`` and a vectorized pure-numpy version. The active backend is read
once from the ``RVBGGM_DISABLE_NUMBA`` environment variable and can be
switched at runtime with :func:`set_backend` (benchmarks and tests use this to
compare both paths in one process).
"""
from __future__ import annotations

import os
from contextlib import contextmanager
from typing import Callable, Iterator

ENV_FLAG = "RVBGGM_DISABLE_NUMBA"

try:
    import numba as _numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    _numba = None

HAVE_NUMBA = _numba is not None


def _flag_disables_numba() -> bool:
    return os.environ.get(ENV_FLAG, "").strip().lower() in {"1", "true", "yes", "on"}


_backend = "numba" if HAVE_NUMBA and not _flag_disables_numba() else "numpy"


def njit(*args, **kwargs) -> Callable:
    """``numba.njit`` with on-disk caching, or an identity decorator without numba."""
    if HAVE_NUMBA:
        kwargs.setdefault("cache", True)
        return _numba.njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]):
        return args[0]
    return lambda fn: fn


def get_backend() -> str:
    """Name of the active kernel backend, ``"numba"`` or ``"numpy"``."""
    return _backend


def set_backend(name: str) -> None:
    """Select the kernel backend for subsequent calls."""
    global _backend
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba is not installed")
    _backend = name


@contextmanager
def backend(name: str) -> Iterator[None]:
    """Temporarily switch the kernel backend."""
    previous = get_backend()
    set_backend(name)
    try:
        yield
    finally:
        set_backend(previous)


def use_numba() -> bool:
    return _backend == "numba"
