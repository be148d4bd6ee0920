"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the pure-Python
reference kernels are used.  Set ``MEMPLAN_PURE_PYTHON=1`` to force the
fallback.
"""

import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("MEMPLAN_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        pass
    else:
        _impl = _compiled
        BACKEND = "cython"

fwd_time = _impl.fwd_time
bwd_time = _impl.bwd_time
sweep_times = _impl.sweep_times
replay_peak = _impl.replay_peak
