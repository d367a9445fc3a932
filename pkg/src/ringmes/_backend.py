"""Pick the compiled propagator when available, else the numpy twin."""

from __future__ import annotations

import os

from . import _kernels_py

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

BACKENDS = ("compiled", "python")


def available() -> tuple[str, ...]:
    return BACKENDS if _compiled is not None else ("python",)


def default_backend() -> str:
    if os.environ.get("RINGMES_PURE_PYTHON", "") not in ("", "0") or _compiled is None:
        return "python"
    return "compiled"


def get(name: str | None = None):
    name = name or default_backend()
    if name == "compiled":
        if _compiled is None:
            raise ImportError("compiled kernels are not built; reinstall with Cython available")
        return _compiled
    if name == "python":
        return _kernels_py
    raise ValueError(f"unknown backend {name!r}; choose from {BACKENDS}")
