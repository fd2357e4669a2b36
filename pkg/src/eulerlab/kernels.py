"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the numpy versions
in ``_pykernels`` are used.  Setting ``EULERLAB_PURE_PYTHON=1`` forces the
fallback (used by the benchmark and the backend-agreement tests).
"""

import os

from . import _pykernels

BACKEND = "python"
_impl = _pykernels

if os.environ.get("EULERLAB_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:  # pragma: no cover - depends on the build
        _impl = _pykernels

derivative = _impl.derivative
node_slopes = _impl.node_slopes
hermite_eval = _impl.hermite_eval
linear_eval = _impl.linear_eval


def backends():
    """Mapping of available backend names to kernel modules."""
    out = {"python": _pykernels}
    try:
        from . import _ckernels

        out["cython"] = _ckernels
    except ImportError:  # pragma: no cover
        pass
    return out
