"""Selects the annealing kernel at import time.

The compiled extension is preferred when it imported cleanly; otherwise the
pure-Python twin takes over. Set SQFREEZE_PURE=1 to force the fallback.
Both expose the same run_shots contract and return bit-identical arrays.
"""

import os

from . import _sa_fallback

if os.environ.get("SQFREEZE_PURE") == "1":
    _impl = _sa_fallback
    KERNEL = "pure"
else:
    try:
        from . import _sa_core as _impl

        KERNEL = "compiled"
    except ImportError:
        _impl = _sa_fallback
        KERNEL = "pure"

run_shots = _impl.run_shots
