"""Hot loops with a compiled implementation and a pure-Python fallback.

The compiled module is used when it imports; set FUSIONKIT_PURE_PYTHON=1 to
force the fallback.  ``BACKEND`` records which one is active.
"""
from __future__ import annotations

import os

from . import _pykernels

_compiled = None
if os.environ.get("FUSIONKIT_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _compiled
    except ImportError:
        _compiled = None

BACKEND = "compiled" if _compiled is not None else "python"
_active = _compiled if _compiled is not None else _pykernels

e10_residuals = _active.e10_residuals
nnt_search = _active.nnt_search
e10_residuals_generic = _pykernels.e10_residuals_generic


def backend(name: str | None = None):
    """The kernel module for 'compiled' or 'python' (None means the active one)."""
    if name is None:
        return _active
    if name == "python":
        return _pykernels
    if name == "compiled":
        if _compiled is None:
            raise ImportError("compiled kernels are not built")
        return _compiled
    raise ValueError(f"unknown backend {name!r}")


def compiled_available() -> bool:
    return _compiled is not None
