"""Hot numerical kernels with a compiled core and a pure-Python fallback.

The compiled extension is used when it was built and imports cleanly; set
``PBTS_PURE_PYTHON=1`` to force the fallback. ``BACKEND`` names the active one.
"""

import os

if os.environ.get("PBTS_PURE_PYTHON", "") not in ("", "0"):
    from . import _pykernels as _impl
    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl
        BACKEND = "cython"
    except ImportError:
        from . import _pykernels as _impl
        BACKEND = "python"

wrap_deg = _impl.wrap_deg
euler_to_rot = _impl.euler_to_rot
rot_to_euler = _impl.rot_to_euler
compose = _impl.compose
inverse = _impl.inverse
relative = _impl.relative
height = _impl.height
project_heightfield = _impl.project_heightfield

SADDLE = 0
WAVE = 1

__all__ = [
    "BACKEND", "SADDLE", "WAVE", "wrap_deg", "euler_to_rot", "rot_to_euler",
    "compose", "inverse", "relative", "height", "project_heightfield",
]
