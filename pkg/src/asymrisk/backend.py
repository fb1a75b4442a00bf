"""Kernel backend selection.

The compiled extension is preferred when it imports; the numpy fallback is
used otherwise, or always when ASYMRISK_PURE_PYTHON=1 is set in the
environment. Both produce bit-identical output, so the choice only affects
speed. `BACKEND` records which one is active.
"""

import os

from . import _lattice_python

__all__ = ["BACKEND", "step_2d", "step_1d"]

_impl = _lattice_python
BACKEND = "python"

if os.environ.get("ASYMRISK_PURE_PYTHON", "") != "1":
    try:
        from . import _lattice_kernels as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        pass

step_2d = _impl.step_2d
step_1d = _impl.step_1d
