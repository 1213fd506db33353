"""Optional numba acceleration.

Set ``QESYNTH_DISABLE_NUMBA=1`` to force the pure-numpy kernels, e.g. on
platforms without an LLVM build or when debugging.
"""

import os

_FLAG = os.environ.get("QESYNTH_DISABLE_NUMBA", "").strip().lower()
DISABLED = _FLAG in ("1", "true", "yes", "on")

try:
    if DISABLED:
        raise ImportError
    from numba import njit

    HAS_NUMBA = True
except ImportError:
    HAS_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]

        def wrap(fn):
            return fn

        return wrap
