"""Hot-loop kernels: compiled core with a pure-numpy fallback.

The Cython extension is preferred when it built; setting
``RETRACE_PURE_PYTHON=1`` forces the fallback. Both backends implement the
same contracts and are compared in ``benchmarks/bench_kernels.py``.
"""

import os

from . import _ref

_impl = _ref
if os.environ.get("RETRACE_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _core as _impl  # type: ignore[no-redef]
    except ImportError:
        pass

cast_rays = _impl.cast_rays
chain_labels = _impl.chain_labels
closest_index = _impl.closest_index
corridor_min_blocking = _impl.corridor_min_blocking


def backend_name() -> str:
    return "compiled" if _impl is not _ref else "pure-python"
