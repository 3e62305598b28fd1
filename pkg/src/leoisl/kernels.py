"""Backend selection for the greedy matching loops.

The compiled ``_kernels`` extension is used when it imports; otherwise the
NumPy fallback. Set ``LEOISL_BACKEND=python`` to force the fallback.
"""

from __future__ import annotations

import os
from types import ModuleType

from . import _kernels_py

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

BACKENDS: dict[str, ModuleType] = {"python": _kernels_py}
if _compiled is not None:
    BACKENDS["cython"] = _compiled

_forced = os.environ.get("LEOISL_BACKEND", "").strip().lower()
if _forced and _forced not in BACKENDS:
    raise ImportError(f"LEOISL_BACKEND={_forced!r} is not available; have {sorted(BACKENDS)}")
DEFAULT = _forced or ("cython" if _compiled is not None else "python")


def get_backend(name: str | None = None) -> ModuleType:
    name = name or DEFAULT
    try:
        return BACKENDS[name]
    except KeyError:
        raise ValueError(f"unknown kernel backend {name!r}; have {sorted(BACKENDS)}") from None
