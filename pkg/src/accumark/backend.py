"""Kernel selection: compiled sweep when available, NumPy otherwise.

Set ACCUMARK_PURE=1 before import to force the NumPy path (used by the
backend-agreement tests and the benchmark).
"""

from __future__ import annotations

import os

if os.environ.get("ACCUMARK_PURE") == "1":
    from . import _kernel_py as _impl
else:
    try:
        from . import _kernel as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _kernel_py as _impl

KERNEL_NAME: str = _impl.NAME
modal_sweep = _impl.modal_sweep
