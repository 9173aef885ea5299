"""Kernel backend selection.

Two interchangeable implementations of the hot loops exist: `_native`
(Cython, built at install time) and `_numpy` (vectorized fallback). They are
contractually bit-identical; tests assert this. The compiled backend is
picked when present, overridable via LIDARSPLAT_BACKEND=numpy|native.
"""

from __future__ import annotations

import os

from . import _numpy as _numpy_backend

_BACKENDS = {"numpy": _numpy_backend}

try:
    from . import _native as _native_backend

    _BACKENDS["native"] = _native_backend
except ImportError:  # extension not built; numpy fallback serves
    _native_backend = None


def available_backends() -> list:
    return sorted(_BACKENDS)


def default_backend_name() -> str:
    env = os.environ.get("LIDARSPLAT_BACKEND")
    if env:
        if env not in _BACKENDS:
            raise ValueError(
                f"LIDARSPLAT_BACKEND={env!r} not available; "
                f"choices: {available_backends()}"
            )
        return env
    return "native" if "native" in _BACKENDS else "numpy"


def get_backend(name: str | None = None):
    """Resolve a backend module by name (None -> default)."""
    if name is None:
        name = default_backend_name()
    try:
        return _BACKENDS[name]
    except KeyError:
        raise ValueError(
            f"unknown backend {name!r}; choices: {available_backends()}"
        ) from None
