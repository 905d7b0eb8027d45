"""Kernel selection: compiled extension when importable, pure Python otherwise.

Set ``ECOROUTE_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _pykernels

if os.environ.get("ECOROUTE_PURE_PYTHON"):
    kernels = _pykernels
else:
    try:
        from . import _kernels as kernels
    except ImportError:  # extension not built
        kernels = _pykernels

BACKEND = kernels.BACKEND
CD = _pykernels.CD
CS = _pykernels.CS
SOC_EPS = _pykernels.SOC_EPS
