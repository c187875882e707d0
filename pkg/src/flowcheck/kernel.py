"""Propagation kernel backends and the switch between them.

Two interchangeable kernels execute lowered sequence programs: a
compiled Cython extension and a pure-Python fallback.  The compiled one
is picked at import time when present; the environment variable
``FLOWCHECK_KERNEL`` (``pure`` or ``compiled``) overrides the choice,
and :func:`set_backend` switches at runtime.
"""

from __future__ import annotations

import os
import warnings

from . import _kernel_py

__all__ = [
    "available_backends",
    "active_backend",
    "set_backend",
    "backend_runner",
    "run_sequence",
]

_RUNNERS = {"pure": _kernel_py.run_sequence}

try:
    from . import _kernel_cy
except ImportError:
    _kernel_cy = None
else:
    _RUNNERS["compiled"] = _kernel_cy.run_sequence


def available_backends() -> tuple[str, ...]:
    return tuple(sorted(_RUNNERS))


def _initial_backend() -> str:
    default = "compiled" if "compiled" in _RUNNERS else "pure"
    requested = os.environ.get("FLOWCHECK_KERNEL")
    if requested is None:
        return default
    if requested in _RUNNERS:
        return requested
    warnings.warn(
        f"FLOWCHECK_KERNEL={requested!r} is not available "
        f"(choices: {', '.join(available_backends())}); using '{default}'",
        RuntimeWarning,
        stacklevel=2,
    )
    return default


_active = _initial_backend()


def active_backend() -> str:
    return _active


def set_backend(name: str) -> None:
    global _active
    if name not in _RUNNERS:
        raise ValueError(
            f"unknown kernel backend {name!r} (choices: {', '.join(available_backends())})"
        )
    _active = name


def backend_runner(name: str):
    try:
        return _RUNNERS[name]
    except KeyError:
        raise ValueError(
            f"unknown kernel backend {name!r} (choices: {', '.join(available_backends())})"
        ) from None


def run_sequence(ops):
    """Execute element ops on the active backend."""
    return _RUNNERS[_active](ops)
