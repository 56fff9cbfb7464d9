"""Backend selection for the pointwise curvature kernels.

The compiled extension is preferred when present; the NumPy fallback is
selected automatically if the build was skipped or failed, or explicitly by
setting GQELAB_PURE=1. Both expose the same four functions with identical
semantics (see benchmarks/bench_kernels.py for a speed comparison).
"""

from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("GQELAB_PURE", "0") not in ("", "0"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels_cy as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

conformal_ricci = _impl.conformal_ricci
conformal_christoffel = _impl.conformal_christoffel
conformal_hessian = _impl.conformal_hessian
gqe_residual = _impl.gqe_residual
