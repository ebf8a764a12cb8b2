"""Kernel backend selection.

The compiled extension (``_kernels``) is preferred when it imported
cleanly; otherwise the numpy fallback (``_kernels_py``) is used.  Both
expose the same functions with the same semantics.  Set
``STRATEGY_AUCTION_BACKEND=python`` to force the fallback.
"""

from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("STRATEGY_AUCTION_BACKEND", "").lower() == "python":
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _kernels_py

BACKEND_NAME: str = _impl.BACKEND_NAME

SIMPLEX_OPTIMAL = _kernels_py.SIMPLEX_OPTIMAL
SIMPLEX_UNBOUNDED = _kernels_py.SIMPLEX_UNBOUNDED
SIMPLEX_MAXITER = _kernels_py.SIMPLEX_MAXITER

simplex_iterate = _impl.simplex_iterate
dot_scores = _impl.dot_scores


def available_backends() -> list[str]:
    names = ["python"]
    try:
        from . import _kernels  # noqa: F401
        names.insert(0, "compiled")
    except ImportError:
        pass
    return names
