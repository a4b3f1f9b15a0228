"""Kernel backend selection.

The hot kernels exist twice: a Cython extension (`_ckern`) and a NumPy
fallback (`_pykernels`).  The lane is chosen once at import time and can be
forced with PATHQUANT_KERNELS=compiled|python (default: auto).
`benchmarks/bench_kernels.py` times the two lanes against each other.
"""

import os

_requested = os.environ.get("PATHQUANT_KERNELS", "auto").lower()
if _requested not in {"auto", "compiled", "python"}:
    raise ValueError(
        f"PATHQUANT_KERNELS must be one of auto|compiled|python, got {_requested!r}"
    )

if _requested == "python":
    from . import _pykernels as _impl

    BACKEND = "python"
else:
    try:
        from . import _ckern as _impl

        BACKEND = "compiled"
    except ImportError:
        if _requested == "compiled":
            raise
        from . import _pykernels as _impl

        BACKEND = "python"

simpson = _impl.simpson
cumulative_simpson = _impl.cumulative_simpson
solve_small_batch = _impl.solve_small_batch
mode_field = _impl.mode_field

__all__ = [
    "BACKEND",
    "simpson",
    "cumulative_simpson",
    "solve_small_batch",
    "mode_field",
]
