"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the numpy
fallback. Set ``TNTF_BACKEND=python`` (or ``cython``) to force one.
"""

import logging
import os

from . import _pykernels

log = logging.getLogger(__name__)


def _load():
    choice = os.environ.get("TNTF_BACKEND", "auto").lower()
    if choice not in ("auto", "cython", "python"):
        raise ImportError(f"TNTF_BACKEND must be auto, cython or python, got {choice!r}")
    if choice == "python":
        return _pykernels
    try:
        from . import _ckernels
    except ImportError:
        if choice == "cython":
            raise
        log.debug("compiled kernels unavailable, using numpy fallback")
        return _pykernels
    return _ckernels


kernels = _load()
name = kernels.NAME


def available():
    """Names of the backends importable in this environment."""
    names = ["python"]
    try:
        from . import _ckernels  # noqa: F401
        names.insert(0, "cython")
    except ImportError:
        pass
    return names


def get(backend_name):
    if backend_name == "python":
        return _pykernels
    if backend_name == "cython":
        from . import _ckernels
        return _ckernels
    raise ValueError(f"unknown backend {backend_name!r}")
