"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the numpy fallback.
``QLDPC_MSA_BACKEND=python`` (or ``cython``) forces a choice at import time.
"""

from __future__ import annotations

import os
from types import ModuleType

from . import _fallback

ENV_VAR = "QLDPC_MSA_BACKEND"

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None


def available() -> list[str]:
    return (["cython"] if _compiled is not None else []) + ["python"]


def get(name: str | None = None) -> ModuleType:
    """Kernel module for ``name`` ('auto', 'cython' or 'python')."""
    name = name or "auto"
    if name == "auto":
        return _compiled if _compiled is not None else _fallback
    if name == "python":
        return _fallback
    if name == "cython":
        if _compiled is None:
            raise RuntimeError("compiled kernels are not built; run `pip install -e .`")
        return _compiled
    raise ValueError(f"unknown backend {name!r}")


def name_of(module: ModuleType) -> str:
    return "python" if module is _fallback else "cython"


DEFAULT: ModuleType = get(os.environ.get(ENV_VAR, "auto"))
