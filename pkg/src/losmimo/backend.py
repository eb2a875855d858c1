"""Select the phase-kernel backend at import time.

The compiled extension is preferred; the NumPy implementation is a drop-in
replacement used when the extension is unavailable or when the environment
variable ``LOSMIMO_PURE_PYTHON=1`` forces it (handy for benchmarking and
for debugging kernel-level discrepancies).

Both backends implement identical math; outputs agree to ~1e-14 relative
(libm rounding differences only). Byte-level output reproducibility is
guaranteed per backend, not across backends.
"""

from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("LOSMIMO_PURE_PYTHON", "") == "1":
    kernels = _kernels_py
else:
    try:
        from . import _kernels as kernels  # type: ignore[no-redef]
    except ImportError:
        kernels = _kernels_py


def backend_name() -> str:
    return kernels.BACKEND_NAME
