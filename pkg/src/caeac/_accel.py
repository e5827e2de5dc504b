"""Numba on/off switch.

Set ``CAEAC_DISABLE_NUMBA=1`` before import to force the pure-numpy kernels.
The switch can also be flipped at runtime with :func:`use_numba`, which is
what the benchmark and the backend-agreement tests do.
"""

import os

JIT_OPTIONS = {"cache": True, "nogil": True}

try:
    import numba  # noqa: F401

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

_FALSY = {"", "0", "false", "no", "off"}
ENABLE_NUMBA = HAVE_NUMBA and os.environ.get("CAEAC_DISABLE_NUMBA", "").strip().lower() in _FALSY


def use_numba(flag: bool = True) -> None:
    """Turn the compiled kernels on or off for the whole process."""
    global ENABLE_NUMBA
    ENABLE_NUMBA = bool(flag) and HAVE_NUMBA


def numba_enabled() -> bool:
    return ENABLE_NUMBA


def njit(func):
    """``numba.njit`` with the package defaults, or identity without numba."""
    if not HAVE_NUMBA:  # pragma: no cover
        return func
    import numba

    return numba.njit(**JIT_OPTIONS)(func)
