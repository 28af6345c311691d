"""Kernel selection: compiled Cython core if it imports, numpy otherwise.

``SCA_KIT_BACKEND=python`` forces the fallback.
"""

import os

from . import _gibbs_py

try:
    from . import _gibbs_ext
except ImportError:  # extension not built
    _gibbs_ext = None

_KERNELS = {"python": _gibbs_py.sample_factor}
if _gibbs_ext is not None:
    _KERNELS["cython"] = _gibbs_ext.sample_factor


def available_backends():
    return tuple(sorted(_KERNELS))


def default_backend():
    forced = os.environ.get("SCA_KIT_BACKEND")
    if forced:
        if forced not in _KERNELS:
            raise RuntimeError(f"SCA_KIT_BACKEND={forced!r} unavailable; have {available_backends()}")
        return forced
    return "cython" if "cython" in _KERNELS else "python"


def get_kernel(name=None):
    name = name or default_backend()
    try:
        return _KERNELS[name]
    except KeyError:
        raise ValueError(f"unknown or unavailable backend {name!r}") from None
