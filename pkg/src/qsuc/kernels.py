"""Import-time selection of the hot-loop backend.

Prefers the compiled extension and falls back to the pure-Python twin when it
is not built. Set ``QSUC_PURE_PYTHON=1`` to force the fallback; the benchmark
uses that to time both sides.
"""

import os

if os.environ.get("QSUC_PURE_PYTHON", "").strip() not in ("", "0"):
    from . import _kernels_py as _impl
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _kernels_py as _impl

BACKEND = _impl.backend_name()
exhaustive_scan = _impl.exhaustive_scan
anneal_sweeps = _impl.anneal_sweeps
