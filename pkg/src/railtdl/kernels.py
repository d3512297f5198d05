"""Backend selection for the hot kernels.

Imports the compiled extension when available, otherwise the NumPy fallback.
Both produce bit-identical results; set ``RAILTDL_BACKEND=python`` or
``=cython`` to force one (the benchmark and the equivalence tests do).
"""

import os

_choice = os.environ.get("RAILTDL_BACKEND", "").lower()
if _choice not in ("", "python", "cython"):
    raise ImportError(f"RAILTDL_BACKEND must be 'python' or 'cython', got {_choice!r}")

if _choice == "python":
    from . import _kernels_py as _impl
else:
    try:
        from . import _ext as _impl
    except ImportError:
        if _choice == "cython":
            raise
        from . import _kernels_py as _impl

BACKEND = "cython" if _impl.__name__.endswith("_ext") else "python"

markov_scan = _impl.markov_scan
phase_fill = _impl.phase_fill

__all__ = ["BACKEND", "markov_scan", "phase_fill"]
