"""Kernel backend selection.

The compiled extension is preferred; the pure-Python module is a drop-in
fallback with identical results. Set ``MINIMAX_EXPLOITER_PURE=1`` to force
the fallback (used by the equivalence tests and the benchmark).
"""

from __future__ import annotations

import os

if os.environ.get("MINIMAX_EXPLOITER_PURE"):
    from . import _c4pure as _impl
else:
    try:
        from . import _c4kernel as _impl  # type: ignore[no-redef]
    except ImportError:
        from . import _c4pure as _impl  # type: ignore[no-redef]

c4_winner = _impl.c4_winner
c4_root_values = _impl.c4_root_values
KERNEL_BACKEND: str = _impl.BACKEND
