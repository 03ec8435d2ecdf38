"""Backend selection for the wake kernels.

The compiled extension is used when it imports; otherwise the numpy version.
Set ``SEQFO_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _wake_py

_wake_ext = None
if os.environ.get("SEQFO_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _wake_ext
    except ImportError:
        _wake_ext = None

_backend = _wake_ext if _wake_ext is not None else _wake_py

BACKEND = "compiled" if _wake_ext is not None else "python"

park_speeds = _backend.park_speeds
park_speeds_jacobian = _backend.park_speeds_jacobian
grid_pair_min = _backend.grid_pair_min


def backends():
    """Map of available backend name -> module, fallback always present."""
    out = {"python": _wake_py}
    if _wake_ext is not None:
        out["compiled"] = _wake_ext
    return out
