"""Kernel backend selection: compiled extension if present, pure Python otherwise.

The active backend is chosen once at import (override with the environment
variable ``SEADIAG_BACKEND=python|compiled``) and can be switched at runtime
with :func:`use`, which the benchmark and the backend-equivalence tests rely
on. Both backends produce bit-identical float64 results.
"""

import os

from . import _kernels_py

_IMPLS = {"python": _kernels_py}

try:
    from . import _kernels_cy
    _IMPLS["compiled"] = _kernels_cy
except ImportError:
    _kernels_cy = None

_active = _IMPLS["python"]


def available():
    """Names of the backends importable in this installation."""
    return tuple(sorted(_IMPLS))


def use(name):
    """Switch the active backend; returns the previously active name."""
    global _active
    if name not in _IMPLS:
        raise ValueError(f"unknown backend {name!r}; available: {available()}")
    previous = _active.NAME
    _active = _IMPLS[name]
    return previous


def kernels():
    """The active kernel module."""
    return _active


def backend_name():
    return _active.NAME


_requested = os.environ.get("SEADIAG_BACKEND", "").strip().lower()
if _requested:
    if _requested not in _IMPLS:
        raise ImportError(
            f"SEADIAG_BACKEND={_requested!r} but only {available()} available")
    use(_requested)
elif "compiled" in _IMPLS:
    use("compiled")
