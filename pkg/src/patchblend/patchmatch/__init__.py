"""Nearest-neighbor fields and the payload remap operator.

The search kernel has a compiled (Cython) implementation and a pure-Python
one with identical semantics.  The compiled core is picked at import when
available; set PATCHBLEND_BACKEND=python or =cython to force a choice.
"""

import os

from . import _fallback

_requested = os.environ.get("PATCHBLEND_BACKEND", "").strip().lower()

if _requested == "python":
    _search = _fallback.nnf_search
    BACKEND = "python"
else:
    try:
        from . import _core
        _search = _core.nnf_search
        BACKEND = "cython"
    except ImportError:
        if _requested == "cython":
            raise
        _search = _fallback.nnf_search
        BACKEND = "python"

from .api import (  # noqa: E402
    Nnf,
    PatchConfig,
    brute_force_nnf,
    estimate_nnf,
    nnf_cost,
    parse_nnf_dump,
    remap,
)

__all__ = [
    "BACKEND",
    "Nnf",
    "PatchConfig",
    "brute_force_nnf",
    "estimate_nnf",
    "nnf_cost",
    "parse_nnf_dump",
    "remap",
]
