"""Backend selection for the hot loops.

The compiled extension is used when importable; set ``CUBICML_PURE_PYTHON=1``
to force the NumPy fallback.
"""

import os

from . import _kernels_py

if os.environ.get("CUBICML_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

kendall_counts = _impl.kendall_counts
best_numeric_split = _impl.best_numeric_split
best_categorical_split = _impl.best_categorical_split
mlp_pair_grads = _impl.mlp_pair_grads
amsgrad_update = _impl.amsgrad_update
