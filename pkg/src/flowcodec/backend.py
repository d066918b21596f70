"""Kernel backend selection.

The compiled extension (flowcodec._core, Cython) is preferred; the pure
NumPy/Python implementation in flowcodec._pure is the fallback. Set the
environment variable FLOWCODEC_PURE=1 to force the fallback. Both produce
bit-identical range-coded streams; CG solutions agree to solver tolerance.
"""

from __future__ import annotations

import os

from . import _pure

if os.environ.get("FLOWCODEC_PURE", "") not in ("", "0"):
    _impl = _pure
else:
    try:
        from . import _core as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _pure

BACKEND_NAME: str = _impl.BACKEND_NAME
cg_solve = _impl.cg_solve
rc_encode = _impl.rc_encode
rc_decode = _impl.rc_decode


def get_backend(name: str):
    """Return the backend module 'pure' or 'compiled' (for benchmarks)."""
    if name == "pure":
        return _pure
    if name == "compiled":
        from . import _core

        return _core
    raise ValueError(f"unknown backend {name!r}")
