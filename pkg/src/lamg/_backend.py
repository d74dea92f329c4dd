"""Kernel backend selection.

The compiled extension is used when importable; set ``LAMG_PURE_PYTHON=1``
to force the pure-Python kernels.
"""

import os

if os.environ.get("LAMG_PURE_PYTHON", "") not in ("", "0"):
    from . import _pykernels as kernels
else:
    try:
        from . import _kernels as kernels
    except ImportError:  # extension not built
        from . import _pykernels as kernels

BACKEND = kernels.NAME
