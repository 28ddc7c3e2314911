"""Backend selection for the tree kernels.

The numba implementation is the default. Set CFCONFORMAL_NO_NUMBA=1 before
import to run on the pure-numpy twin instead (same split rule, same
tie-breaking scan order); the numpy path is also the automatic fallback
when numba cannot be imported.
"""

import os

_flag = os.environ.get("CFCONFORMAL_NO_NUMBA", "").strip().lower()
_disabled = _flag in ("1", "true", "yes", "on")

if not _disabled:
    try:
        from . import tree_numba as _backend

        BACKEND = "numba"
    except ImportError:
        from . import tree_numpy as _backend

        BACKEND = "numpy"
else:
    from . import tree_numpy as _backend

    BACKEND = "numpy"

build_tree = _backend.build_tree
predict_tree = _backend.predict_tree
predict_forest = _backend.predict_forest


def backend_name() -> str:
    return BACKEND
