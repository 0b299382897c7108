"""Kernel backend selection.

The compiled extension is preferred when it imported cleanly; otherwise the
pure-Python kernels take over with identical semantics.  Set
``TEXTFREQ_PURE_PYTHON=1`` to force the fallback (useful for benchmarking and
for debugging suspected backend divergence).
"""

from __future__ import annotations

import os

from textfreq import _pykernels

if os.environ.get("TEXTFREQ_PURE_PYTHON"):
    _impl = _pykernels
else:
    try:
        from textfreq import _ckernels as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _pykernels

BACKEND: str = _impl.backend_name()

tokenize = _impl.tokenize
count_into = _impl.count_into


def available_backends() -> list[str]:
    """Names of the kernel backends importable in this environment."""
    names = []
    try:
        from textfreq import _ckernels  # noqa: F401

        names.append("c")
    except ImportError:
        pass
    names.append("python")
    return names
