"""Kernel backend selection.

The hot inner loops (exponential sweeps, tridiagonal solves, IMEX stages)
exist twice: a Cython extension and a NumPy/SciPy fallback with identical
semantics. The compiled one is used when importable; set
``CHEMOWAVE_KERNELS=python`` or ``compiled`` to force a choice.
"""

import os

from . import _kernels_py


def _select():
    choice = os.environ.get("CHEMOWAVE_KERNELS", "auto").lower()
    if choice not in ("auto", "compiled", "python"):
        raise ValueError(f"CHEMOWAVE_KERNELS must be auto|compiled|python, got {choice!r}")
    if choice == "python":
        return _kernels_py
    try:
        from . import _kernels
        return _kernels
    except ImportError:
        if choice == "compiled":
            raise ImportError(
                "compiled kernels requested via CHEMOWAVE_KERNELS but the "
                "chemowave._kernels extension is not built"
            )
        return _kernels_py


kernels = _select()
KERNEL_BACKEND = kernels.__backend_name__
