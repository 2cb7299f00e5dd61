"""Selects the scoring kernel: compiled extension when importable, else the
pure-Python fallback. Override with the LSHSTREAM_BACKEND environment
variable or an explicit ``backend=`` argument on the scoring entry points.
"""

from __future__ import annotations

import os
from typing import Optional

from . import _pykernels

try:
    from . import _kernels
except ImportError:  # extension not built
    _kernels = None

__all__ = ["available_backends", "default_backend", "kernel_for"]

_MODULES = {"python": _pykernels}
if _kernels is not None:
    _MODULES["cython"] = _kernels


def available_backends() -> tuple:
    return tuple(sorted(_MODULES))


def default_backend() -> str:
    env = os.environ.get("LSHSTREAM_BACKEND")
    if env:
        _check(env)
        return env
    return "cython" if _kernels is not None else "python"


def _check(name: str) -> None:
    if name not in _MODULES:
        raise ValueError(
            f"unknown or unavailable backend {name!r}; available: "
            f"{', '.join(available_backends())}"
        )


def kernel_for(flat, backend: Optional[str] = None):
    """Kernel bound to a FlatForest, cached per backend on the forest."""
    name = backend if backend is not None else default_backend()
    _check(name)
    kernel = flat._kernel_cache.get(name)
    if kernel is None:
        kernel = _MODULES[name].ForestKernel(flat)
        flat._kernel_cache[name] = kernel
    return kernel
