"""Kernel selection.

The compiled ``_kernels`` extension is used when it imports; otherwise the
pure-Python ``_kernels_py``.  Setting ``CUBICPREF_PURE=1`` forces the
fallback.
"""

import os

from . import _kernels_py

if os.environ.get("CUBICPREF_PURE", "") not in ("", "0"):
    impl = _kernels_py
else:
    try:
        from . import _kernels as impl
    except ImportError:
        impl = _kernels_py

BACKEND = impl.BACKEND


def compiled():
    """The compiled kernel module, or ``None`` if it was not built."""
    try:
        from . import _kernels
    except ImportError:
        return None
    return _kernels
