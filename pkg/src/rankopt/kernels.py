"""Backend selection for the hot loops.

The compiled extension is used when importable; otherwise, or when the
environment variable ``RANKOPT_PURE_PYTHON`` is set to a non-empty value other
than ``0``, the numpy fallback is used. ``BACKEND`` names the active choice.
"""
import os

from . import _pykernels

_force_python = os.environ.get("RANKOPT_PURE_PYTHON", "") not in ("", "0")

if _force_python:
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels
        BACKEND = "python"

select_pair = _impl.select_pair
segment_pairs = _impl.segment_pairs
pair_sums = _impl.pair_sums


def backends():
    """Mapping of every importable backend name to its module."""
    found = {"python": _pykernels}
    try:
        from . import _kernels
        found["cython"] = _kernels
    except ImportError:
        pass
    return found
