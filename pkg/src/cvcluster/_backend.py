"""Select the compiled kernels when available, numpy otherwise.

Set ``CVCLUSTER_PURE_PYTHON=1`` to force the numpy fallback.
"""
import os

from . import _kernels_py

kernels = _kernels_py
if os.environ.get("CVCLUSTER_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as kernels  # noqa: F811
    except ImportError:
        kernels = _kernels_py

BACKEND = kernels.NAME


def available_backends():
    """Mapping of backend name to kernel module for every importable backend."""
    out = {"python": _kernels_py}
    try:
        from . import _kernels
    except ImportError:
        pass
    else:
        out["cython"] = _kernels
    return out
