"""Dispatch-kernel backend selection.

The compiled extension is used when it imported cleanly; otherwise the NumPy
fallback takes over. Set MERITCEF_FORCE_PY=1 to force the fallback (useful
for benchmarking and for debugging suspected kernel issues).
"""

from __future__ import annotations

import os

from . import _dispatch_py

if os.environ.get("MERITCEF_FORCE_PY"):
    _impl = _dispatch_py
    BACKEND = "python"
else:
    try:
        from . import _dispatch_core as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        _impl = _dispatch_py
        BACKEND = "python"

dispatch_hours = _impl.dispatch_hours
