"""Backend selection for the numeric inner loops.

The compiled Cython module is used when it was built at install time;
otherwise the numpy implementation is used.  Setting the environment variable
``LIPINVAL_PURE=1`` forces the numpy path.
"""

import os

from . import _pykernels

try:
    if os.environ.get("LIPINVAL_PURE"):
        raise ImportError("pure backend requested")
    from . import _ckernels as _impl

    BACKEND = "cython"
except ImportError:
    _impl = _pykernels
    BACKEND = "numpy"

envelope = _impl.envelope
pairwise_slope_max = _impl.pairwise_slope_max
distances = _impl.distances


def backends():
    """Return the available backends as a ``{name: module}`` dict."""
    found = {"numpy": _pykernels}
    try:
        from . import _ckernels

        found["cython"] = _ckernels
    except ImportError:
        pass
    return found
