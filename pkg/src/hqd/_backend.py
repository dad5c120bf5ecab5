"""Selects the compiled SOR kernels when available, else the numpy fallback.

Set ``HQD_BACKEND=python`` to force the fallback.  ``HQD_THREADS`` caps the
number of OpenMP threads used by the compiled kernels.
"""

from __future__ import annotations

import os

from . import _sor_py

BACKEND = "python"
_impl = _sor_py

if os.environ.get("HQD_BACKEND", "").lower() != "python":
    try:
        from . import _sor_ext as _compiled
    except ImportError:  # extension not built
        _compiled = None
    if _compiled is not None:
        _impl = _compiled
        BACKEND = "cython"


def get_backend(name: str | None = None):
    """Kernel module by name (``"cython"`` or ``"python"``); default is the selected one."""
    if name is None:
        return _impl
    if name == "python":
        return _sor_py
    if name == "cython":
        from . import _sor_ext

        return _sor_ext
    raise ValueError(f"unknown backend {name!r}")


def thread_count() -> int:
    env = os.environ.get("HQD_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1
