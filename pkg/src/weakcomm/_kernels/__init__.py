"""Hot sampling kernels.

The compiled core (``_ckernels``) is used when it has been built; otherwise
the numpy fallback is selected. Set ``WEAKCOMM_PURE_PYTHON=1`` to force the
fallback.
"""

import os

from . import _pykernels

if os.environ.get("WEAKCOMM_PURE_PYTHON", "") not in ("", "0"):
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels
        BACKEND = "python"

splitmix_block = _impl.splitmix_block
uniform_block = _impl.uniform_block
normal_block = _impl.normal_block
weak_measure = _impl.weak_measure
strong_measure = _impl.strong_measure
eigvecs = _pykernels.eigvecs


def available_backends():
    """Map of backend name -> kernel module for every backend that imports."""
    found = {"python": _pykernels}
    try:
        from . import _ckernels
        found["cython"] = _ckernels
    except ImportError:
        pass
    return found
