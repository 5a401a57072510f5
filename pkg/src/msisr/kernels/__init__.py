"""Kernel backend selection.

The compiled extension (``msisr.kernels._native``) is preferred when it was
built; a pure-numpy fallback with bit-identical results is used otherwise.
Set ``MSISR_BACKEND=python`` (or ``compiled``) to force a backend at import
time, or call :func:`select_backend` at runtime.
"""

import os

from . import _purepy

try:
    from . import _native
except ImportError:  # extension not built
    _native = None

_BACKENDS = {"python": _purepy}
if _native is not None:
    _BACKENDS["compiled"] = _native


def available_backends():
    return sorted(_BACKENDS)


def _initial():
    forced = os.environ.get("MSISR_BACKEND", "").strip().lower()
    if forced:
        if forced not in _BACKENDS:
            raise ImportError(
                f"MSISR_BACKEND={forced!r} requested but only {available_backends()} available"
            )
        return _BACKENDS[forced]
    return _BACKENDS.get("compiled", _purepy)


_active = _initial()


def select_backend(name):
    """Switch the active kernel backend; returns the previous backend name."""
    global _active
    if name not in _BACKENDS:
        raise ValueError(f"unknown backend {name!r}; available: {available_backends()}")
    previous = _active.BACKEND
    _active = _BACKENDS[name]
    return previous


def active_backend():
    return _active.BACKEND


def block_average_core(x, factor):
    return _active.block_average_core(x, factor)


def block_adjoint_core(y, factor):
    return _active.block_adjoint_core(y, factor)


def block_gram_core(x, factor):
    return _active.block_gram_core(x, factor)


def gather_axis0(x, idx, w):
    return _active.gather_axis0(x, idx, w)


def gather_axis1(x, idx, w):
    return _active.gather_axis1(x, idx, w)


def cholesky_solve_inplace(chol_lower, b):
    return _active.cholesky_solve_inplace(chol_lower, b)
