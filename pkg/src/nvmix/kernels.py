"""Kernel backend selection.

The compiled ``_kernels`` extension is used when it imports; otherwise the
pure-Python ``_kernels_py`` twin is used. Set ``NVMIX_PURE_PYTHON=1`` to force
the fallback.
"""

import os

from . import _kernels_py

if os.environ.get("NVMIX_PURE_PYTHON") == "1":
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl
    except ImportError:
        _impl = _kernels_py

BACKEND = "python" if _impl is _kernels_py else "compiled"

OK = _kernels_py.OK
STEP_UNDERFLOW = _kernels_py.STEP_UNDERFLOW
MAX_STEPS = _kernels_py.MAX_STEPS
NOT_POSITIVE = _kernels_py.NOT_POSITIVE

bessel_jn = _impl.bessel_jn
polarization = _impl.polarization
dominant_sideband = _impl.dominant_sideband
dominant_sideband_grid = _impl.dominant_sideband_grid
two_level_window = _impl.two_level_window


def backends():
    """Map of every importable backend name to its module."""
    found = {"python": _kernels_py}
    try:
        from . import _kernels
    except ImportError:
        pass
    else:
        found["compiled"] = _kernels
    return found
